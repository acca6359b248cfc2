/** Heuristic level classification: a difficulty score from kanji density and
 * length, mapped to a distribution over N5..N1.  Monotone by construction —
 * adding kanji can only move probability mass toward harder levels.
 */

import { codePoints, kanjiRatio } from './text.js';

export const LEVELS = ['N5', 'N4', 'N3', 'N2', 'N1'] as const;
export type LevelName = (typeof LEVELS)[number];

export interface Classification {
  level: LevelName;
  probabilities: Record<LevelName, number>;
}

const KANJI_WEIGHT = 0.7;
const LENGTH_WEIGHT = 0.3;
const LENGTH_SATURATION = 30; // characters at which length stops adding difficulty
const TEMPERATURE = 0.18;

// Level centers on the difficulty axis: N5 easiest at 0.1, N1 hardest at 0.9.
const CENTERS = [0.1, 0.3, 0.5, 0.7, 0.9];

/** Difficulty in [0, 1], non-decreasing when kanji characters are added. */
export function difficultyScore(text: string): number {
  const length = codePoints(text).length;
  const lengthFactor = Math.min(1, length / LENGTH_SATURATION);
  return KANJI_WEIGHT * kanjiRatio(text) + LENGTH_WEIGHT * lengthFactor;
}

export function classify(text: string): Classification {
  const score = difficultyScore(text);
  const weights = CENTERS.map((c) => Math.exp(-(((score - c) / TEMPERATURE) ** 2)));
  const total = weights.reduce((acc, w) => acc + w, 0);
  const probabilities = {} as Record<LevelName, number>;
  let best: LevelName = LEVELS[0];
  let bestP = -1;
  LEVELS.forEach((name, i) => {
    const p = weights[i]! / total;
    probabilities[name] = p;
    if (p > bestP) {
      best = name;
      bestP = p;
    }
  });
  return { level: best, probabilities };
}
