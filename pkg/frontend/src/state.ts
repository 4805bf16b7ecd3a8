import type { FormSchema, PredictResponse } from "./types.js";

export type Badge = "Required" | "Relaxed" | "Pending" | "Optional";

export interface FieldViewState {
  name: string;
  visible: boolean;
  badge: Badge;
  probability?: number;
  value: string;
}

export interface ValidationError {
  field: string;
  message: string;
}

/**
 * View state of the adaptive form.
 *
 * Badges start from the schema's static required flags (fail-safe default).
 * A prediction round marks unfilled modeled fields Pending; only the
 * response to the *latest* round may update badges, so a stale response can
 * never mark a field Relaxed past a newer commit.
 */
export class FormState {
  readonly fields = new Map<string, FieldViewState>();
  private latestSeq = 0;
  private lastAppliedVersion: string | null = null;

  constructor(
    readonly schema: FormSchema,
    readonly modeledTargets: ReadonlySet<string>,
  ) {
    const ordered = [...schema.fields].sort((a, b) => a.tab_index - b.tab_index);
    for (const spec of ordered) {
      this.fields.set(spec.name, {
        name: spec.name,
        visible: true,
        badge: spec.required ? "Required" : "Optional",
        value: "",
      });
    }
  }

  get(name: string): FieldViewState {
    const state = this.fields.get(name);
    if (!state) throw new Error(`unknown field ${name}`);
    return state;
  }

  setValue(name: string, value: string): void {
    this.get(name).value = value;
  }

  filledValues(): Record<string, string> {
    const filled: Record<string, string> = {};
    for (const [name, state] of this.fields) {
      if (state.value.trim() !== "") filled[name] = state.value;
    }
    return filled;
  }

  /** Start a prediction round; unfilled modeled fields go Pending. */
  beginPrediction(): number {
    this.latestSeq += 1;
    for (const [name, state] of this.fields) {
      if (this.modeledTargets.has(name) && state.value.trim() === "") {
        state.badge = "Pending";
      }
    }
    return this.latestSeq;
  }

  /** Apply a response; returns false when it was stale and discarded. */
  applyPrediction(seq: number, response: PredictResponse): boolean {
    if (seq !== this.latestSeq) return false;
    this.lastAppliedVersion = response.bundle_version;
    const decided = new Map(response.decisions.map((d) => [d.target, d]));
    for (const [name, state] of this.fields) {
      const decision = decided.get(name);
      if (decision) {
        state.badge = decision.final_required ? "Required" : "Relaxed";
        state.probability = decision.probability;
        state.visible = decision.final_required ? true : state.visible;
      } else if (state.badge === "Pending") {
        this.resetToSchemaDefault(name);
      }
    }
    return true;
  }

  /** Request failed: conservative fallback to the schema's static flags. */
  failPrediction(seq: number): void {
    if (seq !== this.latestSeq) return;
    for (const name of this.fields.keys()) {
      const state = this.get(name);
      if (state.badge === "Pending" || state.badge === "Relaxed") {
        this.resetToSchemaDefault(name);
      }
    }
  }

  private resetToSchemaDefault(name: string): void {
    const spec = this.schema.fields.find((f) => f.name === name);
    const state = this.get(name);
    state.badge = spec?.required ? "Required" : "Optional";
    state.probability = undefined;
    state.visible = true;
  }

  get bundleVersion(): string | null {
    return this.lastAppliedVersion;
  }

  /**
   * Submission gate: a field may stay empty only when relaxed by the last
   * prediction or statically optional.
   */
  validate(): ValidationError[] {
    const errors: ValidationError[] = [];
    for (const spec of this.schema.fields) {
      const state = this.get(spec.name);
      if (state.value.trim() !== "") continue;
      if (state.badge === "Relaxed" || state.badge === "Optional") continue;
      if (spec.required) {
        errors.push({
          field: spec.name,
          message: `${spec.name} is required`,
        });
      }
    }
    return errors;
  }

  /** Submission payload (all filled values) or null when validation fails. */
  submit(): Record<string, string> | null {
    return this.validate().length === 0 ? this.filledValues() : null;
  }
}
