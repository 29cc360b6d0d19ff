// Settings form state with inline validation mirroring the server's 400 rules.

export interface DimensionEntry {
  label: string;
  definition: string;
  builtin: boolean;
}

export interface SettingsFormState {
  parser: "grobid" | "plaintext_fallback";
  model: string;
  chaining: boolean;
  k: number;
  dimensions: DimensionEntry[];
  registrationMode: "upload" | "registry";
  nctId: string;
  multiStudy: boolean;
  targetLabel: string;
}

export const DEFAULT_DIMENSIONS: DimensionEntry[] = [
  { label: "hypotheses", definition: "", builtin: true },
  { label: "sample size", definition: "", builtin: true },
  { label: "primary outcomes", definition: "", builtin: true },
  { label: "secondary outcomes", definition: "", builtin: true },
  { label: "statistical analysis plan", definition: "", builtin: true },
  { label: "exclusion criteria", definition: "", builtin: true },
];

/** Recommended defaults are prefilled: GROBID parser, context chaining on. */
export function defaultFormState(): SettingsFormState {
  return {
    parser: "grobid",
    model: "",
    chaining: true,
    k: 5,
    dimensions: DEFAULT_DIMENSIONS.map((d) => ({ ...d })),
    registrationMode: "upload",
    nctId: "",
    multiStudy: false,
    targetLabel: "",
  };
}

const NCT_PATTERN = /^NCT[0-9]{8}$/;

export function addCustomDimension(state: SettingsFormState, label: string, definition: string): SettingsFormState {
  const dimensions = state.dimensions.concat([{ label, definition, builtin: false }]);
  return { ...state, dimensions };
}

export function removeDimension(state: SettingsFormState, index: number): SettingsFormState {
  const dimensions = state.dimensions.filter((_, i) => i !== index);
  return { ...state, dimensions };
}

/** Field-keyed error messages; empty object means the form may submit. */
export function validateForm(
  state: SettingsFormState,
  files: { registration: boolean; paper: boolean },
): Record<string, string> {
  const errors: Record<string, string> = {};
  if (state.dimensions.length === 0) {
    errors.dimensions = "At least one comparison dimension is required.";
  }
  const seen = new Set<string>();
  for (const dim of state.dimensions) {
    const label = dim.label.trim();
    if (!label) {
      errors.dimensions = "Dimension labels must be non-empty.";
      break;
    }
    if (label.length > 120) {
      errors.dimensions = "Dimension labels are limited to 120 characters.";
      break;
    }
    if (dim.definition.length > 2000) {
      errors.dimensions = "Dimension definitions are limited to 2000 characters.";
      break;
    }
    if (!dim.builtin && !dim.definition.trim()) {
      errors.dimensions = `Custom dimension "${label}" needs a definition.`;
      break;
    }
    const key = label.toLowerCase();
    if (seen.has(key)) {
      errors.dimensions = `Duplicate dimension label "${label}".`;
      break;
    }
    seen.add(key);
  }
  if (!Number.isInteger(state.k) || state.k < 1) {
    errors.k = "Excerpts per source must be a whole number of at least 1.";
  }
  if (state.registrationMode === "registry") {
    if (!NCT_PATTERN.test(state.nctId.trim().toUpperCase())) {
      errors.nctId = "Registry identifiers look like NCT12345678.";
    }
  } else if (!files.registration) {
    errors.registration = "Upload a registration file or switch to a registry identifier.";
  }
  if (!files.paper) {
    errors.paper = "Upload the paper to compare against.";
  }
  if (state.multiStudy && !state.targetLabel.trim()) {
    errors.targetLabel = "Name the study to keep, e.g. \"Study 2\".";
  }
  return errors;
}

/** The settings JSON field of POST /tasks. */
export function settingsPayload(state: SettingsFormState): Record<string, unknown> {
  const payload: Record<string, unknown> = {
    parser: state.parser,
    chaining: state.chaining,
    retrieval: { k: state.k, pool_multiplier: 3 },
    dimensions: state.dimensions.map((d) => ({
      label: d.label.trim(),
      definition: d.definition,
      builtin: d.builtin,
    })),
    multi_study: {
      multi_study: state.multiStudy,
      target_label: state.multiStudy ? state.targetLabel.trim() : null,
    },
  };
  if (state.model.trim()) payload.model = state.model.trim();
  if (state.registrationMode === "registry") {
    payload.registration_nct_id = state.nctId.trim().toUpperCase();
  }
  return payload;
}
