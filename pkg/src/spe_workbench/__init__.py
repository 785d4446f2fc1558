"""Round-trip software performance engineering workbench.

Analyze component-based software models through generated closed queueing
networks, detect and solve performance antipatterns on the software side,
apply analyst edits on the performance side, and keep both sides consistent
through trace-based bidirectional transformations.
"""

__version__ = "0.1.0"
