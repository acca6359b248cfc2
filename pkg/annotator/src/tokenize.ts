/** Deterministic rule-based tokenizer: split on sentence terminators, then
 * group consecutive characters of the same class into tokens.  No dictionary,
 * no model — the point is a stable, replayable approximation whose output is
 * structurally valid for downstream dependency-based consumers.
 */

import { classOf, codePoints, type CharClass } from './text.js';

export interface StubToken {
  surface: string;
  charClass: CharClass;
  upos: string;
}

const TERMINATORS = new Set(['。', '！', '？']);

/** Split text into sentences, keeping each terminator with its sentence. */
export function splitSentences(text: string): string[] {
  const out: string[] = [];
  let current = '';
  for (const ch of text) {
    if (ch === '\n' || ch === '\r') {
      if (current.trim() !== '') out.push(current.trim());
      current = '';
      continue;
    }
    current += ch;
    if (TERMINATORS.has(ch)) {
      out.push(current.trim());
      current = '';
    }
  }
  if (current.trim() !== '') out.push(current.trim());
  return out;
}

function uposFor(cls: CharClass, surface: string): string {
  switch (cls) {
    case 'punct':
      return 'PUNCT';
    case 'digit':
      return 'NUM';
    case 'latin':
      return 'X';
    case 'kanji':
    case 'katakana':
      return 'NOUN';
    case 'hiragana':
      return PARTICLES.has(surface) ? 'ADP' : 'VERB';
    default:
      return 'SYM';
  }
}

// Single-token hiragana runs that are (almost always) case particles; any
// other hiragana run is tagged as a predicate chunk.
const PARTICLES = new Set([
  'は', 'が', 'を', 'に', 'で', 'と', 'も', 'の', 'へ', 'や',
  'から', 'まで', 'より', 'ね', 'よ', 'か', 'な', 'わ',
]);

/** Tokenize one sentence into same-class character runs. */
export function tokenize(sentence: string): StubToken[] {
  const cps = codePoints(sentence);
  const tokens: StubToken[] = [];
  let run = '';
  let runClass: CharClass | null = null;
  const flush = () => {
    if (run !== '' && runClass !== null) {
      tokens.push({ surface: run, charClass: runClass, upos: uposFor(runClass, run) });
    }
    run = '';
    runClass = null;
  };
  for (const ch of cps) {
    const cls = classOf(ch.codePointAt(0)!);
    if (cls === 'space') {
      flush();
      continue;
    }
    if (cls !== runClass) {
      flush();
      runClass = cls;
    }
    run += ch;
  }
  flush();
  return tokens;
}
