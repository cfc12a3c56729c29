/** Visual encodings: every mapping is monotone in its input. */

export const VALUE_MIN = 67;
export const VALUE_MAX = 100;
export const OPACITY_FLOOR = 0.3;

/** Target value onto green opacity: 67 -> 0.3 floor, 100 -> fully opaque. */
export function valueOpacity(value: number): number {
  const clamped = Math.min(VALUE_MAX, Math.max(VALUE_MIN, value));
  const frac = (clamped - VALUE_MIN) / (VALUE_MAX - VALUE_MIN);
  return OPACITY_FLOOR + (1 - OPACITY_FLOOR) * frac;
}

/** Favoring head-count onto blue opacity for the target's support section. */
export function supportOpacity(support: number, population: number): number {
  if (population <= 0) return 0;
  const frac = Math.min(1, Math.max(0, support / population));
  return frac === 0 ? 0 : OPACITY_FLOOR + (1 - OPACITY_FLOOR) * frac;
}

/** Quadrant whiteness for the abstract collective rectangle. */
export function quadrantBrightness(count: number, population: number): number {
  if (population <= 0) return 0;
  return Math.min(1, Math.max(0, count / population));
}

export type OutlineClass = "investigating" | "in_range" | "abandoned" | null;

export const OUTLINE_COLORS: Record<Exclude<OutlineClass, null>, string> = {
  investigating: "#ffffff",
  in_range: "#f2c200",
  abandoned: "#e03b2f",
};

/** Border semantics relative to the selected collective. */
export function outlineClass(
  inRange: boolean,
  supportFromSelected: number,
  abandonedBySelected: boolean,
): OutlineClass {
  if (!inRange) return null;
  if (abandonedBySelected) return "abandoned";
  if (supportFromSelected > 0) return "investigating";
  return "in_range";
}

/** Entity dot palette for the individual-agents view, keyed by state index. */
export const ENTITY_COLORS = ["#9aa0a6", "#f9ab00", "#1a73e8", "#a142f4"];
