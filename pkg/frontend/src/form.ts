import { ApiClient } from "./api.js";
import { debounce } from "./debounce.js";
import { FormState } from "./state.js";
import type { FieldSpec, SchemaResponse } from "./types.js";

export const COMMIT_DEBOUNCE_MS = 150;

function controlFor(spec: FieldSpec): HTMLInputElement | HTMLSelectElement {
  if (spec.kind === "categorical") {
    const select = document.createElement("select");
    const blank = document.createElement("option");
    blank.value = "";
    blank.textContent = "--";
    select.appendChild(blank);
    for (const category of spec.categories ?? []) {
      const option = document.createElement("option");
      option.value = category;
      option.textContent = category;
      select.appendChild(option);
    }
    return select;
  }
  const input = document.createElement("input");
  input.type = spec.kind === "numerical" ? "number" : "text";
  return input;
}

export class AdaptiveForm {
  readonly state: FormState;
  readonly root: HTMLElement;
  private readonly badges = new Map<string, HTMLElement>();
  private readonly rows = new Map<string, HTMLElement>();
  private readonly errors = new Map<string, HTMLElement>();
  private readonly debouncedCommit: () => void;
  private inFlight: Promise<void> = Promise.resolve();

  constructor(
    private readonly api: ApiClient,
    schemaResponse: SchemaResponse,
    container: HTMLElement,
  ) {
    this.state = new FormState(
      schemaResponse.schema,
      new Set(schemaResponse.modeled_targets),
    );
    this.root = container;
    this.debouncedCommit = debounce(() => this.commit(), COMMIT_DEBOUNCE_MS);
    this.render(schemaResponse);
  }

  private render(schemaResponse: SchemaResponse): void {
    this.root.textContent = "";
    const ordered = [...schemaResponse.schema.fields].sort(
      (a, b) => a.tab_index - b.tab_index,
    );
    const groupBoxes = new Map<string, HTMLElement>();
    for (const spec of ordered) {
      const row = document.createElement("div");
      row.className = "field-row";
      row.dataset.field = spec.name;

      const label = document.createElement("label");
      label.textContent = spec.name;
      label.htmlFor = `field-${spec.name}`;

      const control = controlFor(spec);
      control.id = `field-${spec.name}`;
      control.name = spec.name;
      control.tabIndex = spec.tab_index + 1;
      control.addEventListener("change", () => this.onEdit(spec, control.value));
      if (control instanceof HTMLInputElement) {
        control.addEventListener("blur", () => this.onEdit(spec, control.value));
      }

      const badge = document.createElement("span");
      badge.className = "badge";
      badge.dataset.badgeFor = spec.name;

      const error = document.createElement("span");
      error.className = "field-error";
      error.dataset.errorFor = spec.name;

      row.append(label, control, badge, error);
      this.badges.set(spec.name, badge);
      this.rows.set(spec.name, row);
      this.errors.set(spec.name, error);

      if (spec.group) {
        let box = groupBoxes.get(spec.group);
        if (!box) {
          box = document.createElement("fieldset");
          box.dataset.group = spec.group;
          const legend = document.createElement("legend");
          legend.textContent = spec.group;
          box.appendChild(legend);
          groupBoxes.set(spec.group, box);
          this.root.appendChild(box);
        }
        box.appendChild(row);
      } else {
        this.root.appendChild(row);
      }
    }
    if (ordered.length === 0) {
      const empty = document.createElement("p");
      empty.textContent = "The form schema is empty.";
      this.root.appendChild(empty);
    }
    this.refreshBadges();
  }

  private onEdit(spec: FieldSpec, value: string): void {
    this.state.setValue(spec.name, value);
    if (spec.kind === "categorical") {
      // selects commit immediately; typing commits after the debounce
      this.commit();
    } else {
      this.debouncedCommit();
    }
  }

  /** POST the currently filled values; latest round wins. */
  commit(): void {
    const seq = this.state.beginPrediction();
    this.refreshBadges();
    const round = this.api
      .predict(this.state.filledValues())
      .then((response) => {
        this.state.applyPrediction(seq, response);
      })
      .catch(() => {
        this.state.failPrediction(seq);
      })
      .then(() => this.refreshBadges());
    this.inFlight = round;
  }

  /** Resolves when the most recent prediction round has settled. */
  whenIdle(): Promise<void> {
    return this.inFlight;
  }

  refreshBadges(): void {
    for (const [name, badge] of this.badges) {
      const field = this.state.get(name);
      badge.textContent =
        field.badge === "Relaxed" && field.probability !== undefined
          ? `Relaxed (${field.probability.toFixed(2)})`
          : field.badge;
      badge.dataset.state = field.badge.toLowerCase();
      const row = this.rows.get(name)!;
      row.classList.toggle("relaxed", field.badge === "Relaxed");
      row.classList.toggle("hidden", !field.visible);
    }
  }

  /** Validate and return the payload, rendering inline messages on failure. */
  submit(): Record<string, string> | null {
    const failures = this.state.validate();
    for (const [name, element] of this.errors) {
      const failure = failures.find((f) => f.field === name);
      element.textContent = failure ? failure.message : "";
    }
    return failures.length === 0 ? this.state.filledValues() : null;
  }
}

export async function renderForm(
  api: ApiClient,
  container: HTMLElement,
): Promise<AdaptiveForm> {
  const schemaResponse = await api.getSchema();
  return new AdaptiveForm(api, schemaResponse, container);
}
