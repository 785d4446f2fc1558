/** JSON payload shapes of the workbench HTTP API (/api/v1). */

export interface ResponseEntry {
  class: string;
  value: number;
  threshold: number;
  violated: boolean;
}

export interface UtilizationEntry {
  center: string;
  value: number;
  threshold: number;
  violated: boolean;
}

export interface Report {
  satisfied: boolean;
  responseTimes: ResponseEntry[];
  utilizations: UtilizationEntry[];
}

export interface ResultClassRow {
  id: string;
  population: number;
  thinkTimeSec: number;
  throughputPerSec: number;
  cycleTimeSec: number;
  serverSideResponseSec: number;
}

export interface ResultCenterRow {
  id: string;
  utilization: number | null;
  residenceSec: Record<string, number>;
  queueLength: Record<string, number>;
}

export interface SolverResultDoc {
  version: string;
  method: string;
  approximate: boolean;
  classes: ResultClassRow[];
  centers: ResultCenterRow[];
}

export interface SplitPartSpec {
  name: string;
  probability: number;
  operations: string[] | null;
}

export type ActionSpec =
  | { type: "blobSplit"; subject: string; parts: SplitPartSpec[] }
  | {
      type: "estFacade";
      scenario: string;
      caller: string;
      callee: string;
      remoteFacadeName: string;
      localFacadeName: string;
    }
  | { type: "qnEdits"; edits: QnEditSpec[] };

export type QnEditSpec =
  | { kind: "splitCenter"; center: string; parts: { id: string; probability: number }[] }
  | { kind: "changeDemand"; center: string; class: string; newDemand: number }
  | { kind: "changeRouting"; center: string; parts: string[]; newProbabilities: number[] }
  | { kind: "changeThinkTime"; class: string; seconds: number };

export interface TreeNode {
  id: string;
  parent: string | null;
  children: string[];
  action: ActionSpec | null;
  result: SolverResultDoc;
  report: Report;
  bottleneck: string | null;
  hasQnEdits: boolean;
}

export interface Tree {
  rootId: string;
  cursor: string;
  nodes: TreeNode[];
}

export interface Occurrence {
  kind: "blob" | "est";
  subject: string | string[];
  evidence: Record<string, number>;
  candidatePlans: unknown[];
}

export interface QnCenterView {
  id: string;
  kind: "delay" | "ps";
  frozen: boolean;
  demand: Record<string, number>;
}

export interface QnView {
  classes: { id: string; population: number; thinkTimeSec: number }[];
  centers: QnCenterView[];
  journal: QnEditSpec[];
}

export interface Ledger {
  softwareIterations: number;
  performanceIterations: number;
  tForward: number[];
  tForth: number[];
  tBack: number[];
  tradeoff: { lhs: number; rhs: number; softwareSideCheaper: boolean } | null;
}
