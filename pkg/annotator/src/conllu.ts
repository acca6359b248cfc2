/** CoNLL-U serialization of stub parses.
 *
 * The stub emits a flat dependency structure: the last non-punctuation token
 * is the root and every other token attaches to it.  That is deliberately
 * head-final — and deliberately shallow: consumers get valid, single-rooted
 * trees without this module pretending to know real syntax.
 */

import { splitSentences, tokenize, type StubToken } from './tokenize.js';

function rootIndex(tokens: StubToken[]): number {
  for (let i = tokens.length - 1; i >= 0; i--) {
    if (tokens[i]!.upos !== 'PUNCT') return i;
  }
  return tokens.length - 1;
}

function deprelFor(token: StubToken, isRoot: boolean): string {
  if (isRoot) return 'root';
  if (token.upos === 'PUNCT') return 'punct';
  if (token.upos === 'ADP') return 'case';
  return 'dep';
}

export function sentenceToConllu(sentence: string, sentId: number): string {
  const tokens = tokenize(sentence);
  if (tokens.length === 0) {
    throw new Error('sentence has no tokens');
  }
  const root = rootIndex(tokens);
  const lines = [`# sent_id = ${sentId}`, `# text = ${sentence}`];
  tokens.forEach((tok, i) => {
    const head = i === root ? 0 : root + 1;
    const cols = [
      String(i + 1),
      tok.surface,
      tok.surface, // no lemmatizer in the stub: dictionary form = surface
      tok.upos,
      '_',
      '_',
      String(head),
      deprelFor(tok, i === root),
      '_',
      '_',
    ];
    lines.push(cols.join('\t'));
  });
  return lines.join('\n');
}

/** Full /parse payload: one CoNLL-U block per sentence, blank-line separated. */
export function parseToConllu(text: string): string {
  const sentences = splitSentences(text);
  if (sentences.length === 0) {
    throw new Error('no sentences in input');
  }
  return sentences.map((s, i) => sentenceToConllu(s, i)).join('\n\n') + '\n';
}
