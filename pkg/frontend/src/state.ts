// Session state: the spec editor's parameter partition, debounced refresh
// and stale-response discarding.  Everything here is pure enough to unit
// test without a DOM.

import type { EvaluateEntry, InlineSpec, PolicyRow, SpecDocument } from "./types";

export type ParamRole =
  | { kind: "numeric"; value: string }
  | { kind: "relation"; expr: string }
  | { kind: "free" };

/** One role per parameter, so numeric/relation/free always partition. */
export class SpecEditor {
  private roles = new Map<string, ParamRole>();

  static fromDocument(doc: SpecDocument): SpecEditor {
    const editor = new SpecEditor();
    for (const [name, value] of Object.entries(doc.numeric)) {
      editor.setNumeric(name, String(value));
    }
    for (const [name, expr] of Object.entries(doc.relations)) {
      editor.setRelation(name, expr);
    }
    for (const name of doc.free) {
      editor.setFree(name);
    }
    return editor;
  }

  role(name: string): ParamRole | undefined {
    return this.roles.get(name);
  }

  setNumeric(name: string, value: string): void {
    this.roles.set(name, { kind: "numeric", value });
  }

  setRelation(name: string, expr: string): void {
    this.roles.set(name, { kind: "relation", expr });
  }

  setFree(name: string): void {
    this.roles.set(name, { kind: "free" });
  }

  clear(name: string): void {
    this.roles.delete(name);
  }

  freeParameters(): string[] {
    return [...this.roles.entries()]
      .filter(([, role]) => role.kind === "free")
      .map(([name]) => name);
  }

  toSpec(): InlineSpec {
    const spec: InlineSpec = { numeric: {}, relations: {}, free: [] };
    for (const [name, role] of this.roles) {
      if (role.kind === "numeric") spec.numeric[name] = role.value;
      else if (role.kind === "relation") spec.relations[name] = role.expr;
      else spec.free.push(name);
    }
    return spec;
  }

  /** The partition invariant holds by construction; checked for tests. */
  isPartition(): boolean {
    const spec = this.toSpec();
    const names = [
      ...Object.keys(spec.numeric),
      ...Object.keys(spec.relations),
      ...spec.free,
    ];
    return new Set(names).size === names.length;
  }
}

export type Clock = {
  set: (fn: () => void, ms: number) => unknown;
  clear: (handle: unknown) => void;
};

const realClock: Clock = {
  set: (fn, ms) => setTimeout(fn, ms),
  clear: (handle) => clearTimeout(handle as ReturnType<typeof setTimeout>),
};

/** Trailing-edge debounce so slider drags issue one request per pause. */
export class Debouncer {
  private handle: unknown = null;

  constructor(
    private ms: number,
    private fn: () => void,
    private clock: Clock = realClock,
  ) {}

  trigger(): void {
    if (this.handle !== null) this.clock.clear(this.handle);
    this.handle = this.clock.set(() => {
      this.handle = null;
      this.fn();
    }, this.ms);
  }
}

/** Monotone sequence numbers; responses from superseded requests are dropped. */
export class SequenceGate {
  private counter = 0;

  issue(): number {
    return ++this.counter;
  }

  isCurrent(seq: number): boolean {
    return seq === this.counter;
  }
}

export const DEBOUNCE_MS = 150;

/** What the EU panel shows for one entry: the exact decimal when the entry
 * is fully numeric, otherwise the polynomial text, both verbatim. */
export function entryDisplay(entry: EvaluateEntry): string {
  return entry.value ?? entry.polynomial;
}

export function configKey(config: Record<string, number>): string {
  return Object.entries(config)
    .sort((a, b) => b[0].localeCompare(a[0]))
    .map(([k, v]) => `${k}=${v}`)
    .join(",");
}

/** Blocks whose winning margin is small enough to deserve a warning. */
export function tightBlocks(rows: PolicyRow[], threshold: number): PolicyRow[] {
  return rows.filter(
    (r) => r.margin !== null && Math.abs(parseFloat(r.margin)) < threshold,
  );
}

/** Cell index containing a value, matching the service's center layout. */
export function cellOf(
  axis: { lo: number; hi: number; steps: number },
  value: number,
): number {
  const width = (axis.hi - axis.lo) / axis.steps;
  const idx = Math.floor((value - axis.lo) / width);
  return Math.min(Math.max(idx, 0), axis.steps - 1);
}
