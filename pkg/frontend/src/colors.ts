import type { Verdict } from "./types.js";

/** Row color class per verdict: deviation red, none blue, missing yellow. */
export function verdictColor(verdict: Verdict): string {
  switch (verdict) {
    case "yes":
      return "verdict-red";
    case "no":
      return "verdict-blue";
    case "missing":
      return "verdict-yellow";
  }
}

/** Text label shown alongside the color so the verdict survives without it. */
export function verdictLabel(verdict: Verdict): string {
  switch (verdict) {
    case "yes":
      return "Deviation";
    case "no":
      return "No deviation";
    case "missing":
      return "Insufficient evidence";
  }
}
