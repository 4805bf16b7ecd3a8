/** Wire formats of the prediction service (GET /schema, POST /predict). */

export type FieldKind = "textual" | "numerical" | "categorical";

export interface FieldSpec {
  name: string;
  kind: FieldKind;
  required: boolean;
  conditionally_required?: boolean;
  tab_index: number;
  group?: string;
  categories?: string[];
}

export interface FormSchema {
  fields: FieldSpec[];
  groups: { id: string; members: string[] }[];
}

export interface SchemaResponse {
  bundle_version: string;
  schema: FormSchema;
  modeled_targets: string[];
}

export interface PredictDecision {
  target: string;
  class: "required" | "optional";
  probability: number;
  endorsed: boolean;
  final_required: boolean;
  latency_ms: number;
}

export interface PredictResponse {
  bundle_version: string;
  decisions: PredictDecision[];
}
