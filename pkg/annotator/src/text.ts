/** Character classification for the rule-based tokenizer and the
 * level-classification heuristic.  Everything works on code points so
 * offsets agree with engines that count characters, not UTF-16 units.
 */

export type CharClass =
  | 'hiragana'
  | 'katakana'
  | 'kanji'
  | 'latin'
  | 'digit'
  | 'punct'
  | 'space'
  | 'other';

const PUNCT = new Set([
  0x3001, // 、
  0x3002, // 。
  0xff01, // ！
  0xff1f, // ？
  0x30fb, // ・
  0x300c, // 「
  0x300d, // 」
  0x300e, // 『
  0x300f, // 』
  0x3008, // 〈
  0x3009, // 〉
  0x300a, // 《
  0x300b, // 》
  0xff08, // （
  0xff09, // ）
  0xff0c, // ，
  0xff0e, // ．
  0xff1a, // ：
  0xff1b, // ；
  0x2026, // …
  0x2014, // —
  0x301c, // 〜
  0xff5e, // ～
]);

function inRange(cp: number, lo: number, hi: number): boolean {
  return cp >= lo && cp <= hi;
}

export function classOf(cp: number): CharClass {
  if (cp === 0x20 || cp === 0x3000 || cp === 0x09 || cp === 0x0a || cp === 0x0d) {
    return 'space';
  }
  if (PUNCT.has(cp)) return 'punct';
  if (inRange(cp, 0x3041, 0x309f)) return 'hiragana';
  // ー (long vowel mark) binds to katakana runs.
  if (inRange(cp, 0x30a0, 0x30ff) || inRange(cp, 0x31f0, 0x31ff) || cp === 0x30fc) {
    return 'katakana';
  }
  if (isKanjiCp(cp)) return 'kanji';
  if (inRange(cp, 0x41, 0x5a) || inRange(cp, 0x61, 0x7a)) return 'latin';
  if (inRange(cp, 0xff21, 0xff3a) || inRange(cp, 0xff41, 0xff5a)) return 'latin';
  if (inRange(cp, 0x30, 0x39) || inRange(cp, 0xff10, 0xff19)) return 'digit';
  if (inRange(cp, 0x21, 0x2f) || inRange(cp, 0x3a, 0x40) || inRange(cp, 0x5b, 0x60) || inRange(cp, 0x7b, 0x7e)) {
    return 'punct';
  }
  return 'other';
}

export function isKanjiCp(cp: number): boolean {
  return (
    inRange(cp, 0x4e00, 0x9fff) || // CJK Unified Ideographs
    inRange(cp, 0x3400, 0x4dbf) || // Extension A
    inRange(cp, 0xf900, 0xfaff) || // Compatibility Ideographs
    cp === 0x3005 // 々 iteration mark, behaves as kanji
  );
}

/** Code-point array of a string (so indices count characters). */
export function codePoints(text: string): string[] {
  return Array.from(text);
}

export function kanjiRatio(text: string): number {
  let kanji = 0;
  let counted = 0;
  for (const ch of text) {
    const cls = classOf(ch.codePointAt(0)!);
    if (cls === 'space' || cls === 'punct') continue;
    counted += 1;
    if (cls === 'kanji') kanji += 1;
  }
  return counted === 0 ? 0 : kanji / counted;
}
