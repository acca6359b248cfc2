import { describe, expect, it } from 'vitest';
import { parseToConllu, sentenceToConllu } from '../src/conllu.js';

function tokenLines(block: string): string[][] {
  return block
    .split('\n')
    .filter((line) => line !== '' && !line.startsWith('#'))
    .map((line) => line.split('\t'));
}

describe('sentenceToConllu', () => {
  it('emits ten tab-separated columns per token with 1-based ids', () => {
    const rows = tokenLines(sentenceToConllu('本を読んだ。', 0));
    expect(rows).toHaveLength(5);
    rows.forEach((cols, i) => {
      expect(cols).toHaveLength(10);
      expect(cols[0]).toBe(String(i + 1));
    });
  });

  it('roots the last non-punctuation token and hangs the rest off it', () => {
    const rows = tokenLines(sentenceToConllu('本を読んだ。', 0));
    // 本 を 読 んだ 。 -> んだ (id 4) is root; 。 attaches to it.
    const heads = rows.map((cols) => cols[6]);
    const deprels = rows.map((cols) => cols[7]);
    expect(heads).toEqual(['4', '4', '4', '0', '4']);
    expect(deprels).toEqual(['dep', 'case', 'dep', 'root', 'punct']);
  });

  it('includes text and sent_id comments', () => {
    const block = sentenceToConllu('ねこがいる。', 3);
    expect(block.startsWith('# sent_id = 3\n# text = ねこがいる。\n')).toBe(true);
  });

  it('rejects an empty sentence', () => {
    expect(() => sentenceToConllu('', 0)).toThrow();
  });
});

describe('parseToConllu', () => {
  it('produces one blank-line-separated block per sentence', () => {
    const output = parseToConllu('本を読む。外は雨だ。');
    const blocks = output.trim().split('\n\n');
    expect(blocks).toHaveLength(2);
    expect(blocks[0]).toContain('# sent_id = 0');
    expect(blocks[1]).toContain('# sent_id = 1');
  });

  it('ends with a newline and is byte-deterministic', () => {
    const text = 'コーヒーを飲んだ。すごくおいしかった！';
    const a = parseToConllu(text);
    expect(a.endsWith('\n')).toBe(true);
    expect(a).toBe(parseToConllu(text));
  });

  it('rejects whitespace-only input', () => {
    expect(() => parseToConllu('  \n')).toThrow();
  });

  it('every block has exactly one root', () => {
    const output = parseToConllu('これはペンです。それは本です。違います！');
    for (const block of output.trim().split('\n\n')) {
      const roots = tokenLines(block).filter((cols) => cols[6] === '0');
      expect(roots).toHaveLength(1);
      expect(roots[0]![7]).toBe('root');
    }
  });
});
