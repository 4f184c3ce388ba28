// Rich-text command scanning, mirroring the server's scanner exactly:
// \cite{key} and \media{id} with keys over [A-Za-z0-9_:-], leftmost complete
// command wins, everything else passes through as literal text.

export type Token =
  | { kind: "text"; value: string }
  | { kind: "cite" | "media"; key: string };

const COMMAND = /\\(cite|media)\{([A-Za-z0-9_:-]+)\}/g;

export function parseRichText(text: string): Token[] {
  const tokens: Token[] = [];
  let pos = 0;
  COMMAND.lastIndex = 0;
  for (const m of text.matchAll(COMMAND)) {
    const start = m.index ?? 0;
    if (start > pos) {
      tokens.push({ kind: "text", value: text.slice(pos, start) });
    }
    tokens.push({ kind: m[1] as "cite" | "media", key: m[2] });
    pos = start + m[0].length;
  }
  if (pos < text.length) {
    tokens.push({ kind: "text", value: text.slice(pos) });
  }
  return tokens;
}

export function serializeRichText(tokens: Token[]): string {
  return tokens
    .map((t) => (t.kind === "text" ? t.value : `\\${t.kind}{${t.key}}`))
    .join("");
}
