/** Client-side form validation.  The UI does no solver math; checking that
 * probabilities form a distribution is the one numeric rule it owns. */

export const PROBABILITY_TOLERANCE = 1e-9;

export function probabilitiesValid(probs: number[]): string | null {
  if (probs.length === 0) {
    return "at least one branch is required";
  }
  for (const p of probs) {
    if (!Number.isFinite(p) || p <= 0 || p > 1) {
      return `probability ${p} must be in (0, 1]`;
    }
  }
  const total = probs.reduce((a, b) => a + b, 0);
  if (Math.abs(total - 1) > PROBABILITY_TOLERANCE) {
    return `probabilities sum to ${total}, expected 1`;
  }
  return null;
}

export function demandValid(value: number): string | null {
  if (!Number.isFinite(value) || value < 0) {
    return `demand ${value} must be a number >= 0`;
  }
  return null;
}

export function namesValid(names: string[]): string | null {
  if (names.some((n) => n.trim() === "")) {
    return "names must not be empty";
  }
  if (new Set(names).size !== names.length) {
    return "names must be distinct";
  }
  return null;
}
