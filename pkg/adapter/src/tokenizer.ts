/**
 * Byte-level tokenizer over printable ASCII.
 *
 * Id 0 is the newline/stop token; 1..94 map to characters 0x20..0x7d;
 * everything else folds to the '?' id. No external vocabulary files.
 */

export const STOP_TOKEN = 0;
export const VOCAB_SIZE = 96;

const UNKNOWN = "?".charCodeAt(0) - 0x20 + 1;

export function encodeText(text: string): number[] {
  const ids: number[] = [];
  for (const ch of text) {
    if (ch === "\n") {
      ids.push(STOP_TOKEN);
      continue;
    }
    const code = ch.charCodeAt(0);
    ids.push(code >= 0x20 && code <= 0x7d ? code - 0x20 + 1 : UNKNOWN);
  }
  return ids;
}

export function decodeTokens(ids: number[]): string {
  let out = "";
  for (const id of ids) {
    out += id === STOP_TOKEN ? "\n" : String.fromCharCode(id - 1 + 0x20);
  }
  return out;
}
