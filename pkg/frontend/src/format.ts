/** Presentation helpers: badges, score formatting, highlight segments. */

import type { Highlight } from "./api.js";

export const LABEL_BADGES: Record<string, { color: string; tooltip: string }> = {
  Supportive: {
    color: "#1a7f37",
    tooltip: "Pushes back on the seeker's view with encouragement or advice",
  },
  Informative: {
    color: "#9a6700",
    tooltip: "Adds neutral guidance, resources, or coping information",
  },
  Similar: {
    color: "#0969da",
    tooltip: "Shares an experience close to the seeker's own",
  },
};

export function formatScore(score: number): string {
  // display only; the underlying value stays the API payload number
  return score.toFixed(3);
}

export function formatContribution(value: number): string {
  return (value >= 0 ? "+" : "") + value.toFixed(3);
}

export interface TextSegment {
  text: string;
  lexicon?: string;
  concept?: string;
}

/** Split a token list into plain/highlighted segments for rendering. */
export function highlightSegments(tokens: string[], highlights: Highlight[]): TextSegment[] {
  const byStart = new Map<number, Highlight>();
  for (const h of highlights) byStart.set(h.start, h);
  const segments: TextSegment[] = [];
  let plain: string[] = [];
  let i = 0;
  while (i < tokens.length) {
    const hit = byStart.get(i);
    if (hit) {
      if (plain.length) {
        segments.push({ text: plain.join(" ") });
        plain = [];
      }
      segments.push({
        text: tokens.slice(hit.start, hit.end).join(" "),
        lexicon: hit.lexicon,
        concept: hit.concept,
      });
      i = hit.end;
    } else {
      plain.push(tokens[i]);
      i += 1;
    }
  }
  if (plain.length) segments.push({ text: plain.join(" ") });
  return segments;
}

export function featureBars(payload: { psy: number[]; covid: number[] }): { name: string; value: number }[] {
  const psyNames = ["Emotional", "Social", "Biological", "Cognitive", "FocusFuture", "Modals"];
  const covidNames = ["InstADL", "BasicADL", "Equipment"];
  return [
    ...payload.psy.map((value, i) => ({ name: psyNames[i], value })),
    ...payload.covid.map((value, i) => ({ name: covidNames[i], value })),
  ];
}
