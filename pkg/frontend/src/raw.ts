// Byte-level provenance tools: the viewer hashes the exact bytes the server
// produced, never a re-serialization. Because the server's JSON is canonical
// (sorted keys, compact separators), slicing the raw "result" value out of a
// response body yields the identical text the CLI writes to its result file
// (plus the trailing newline), so the debug-panel hash is directly
// comparable with `sha256sum` of a CLI output. The slicer below is
// string-aware but assumes well-formed JSON, which the server guarantees.

export function extractTopLevelValue(body: string, key: string): string {
  const needle = `"${key}":`;
  let depth = 0;
  let inString = false;
  let escaped = false;
  for (let i = 0; i < body.length; i++) {
    const ch = body[i];
    if (inString) {
      if (escaped) escaped = false;
      else if (ch === "\\") escaped = true;
      else if (ch === '"') inString = false;
      continue;
    }
    if (ch === '"') {
      // top-level keys live at depth 1
      if (depth === 1 && body.startsWith(needle, i)) {
        const start = i + needle.length;
        return sliceValue(body, start);
      }
      inString = true;
      continue;
    }
    if (ch === "{" || ch === "[") depth++;
    else if (ch === "}" || ch === "]") depth--;
  }
  throw new Error(`key ${JSON.stringify(key)} not found at the top level`);
}

function sliceValue(body: string, start: number): string {
  let depth = 0;
  let inString = false;
  let escaped = false;
  for (let i = start; i < body.length; i++) {
    const ch = body[i];
    if (inString) {
      if (escaped) escaped = false;
      else if (ch === "\\") escaped = true;
      else if (ch === '"') inString = false;
      if (depth === 0 && !inString) return body.slice(start, i + 1);
      continue;
    }
    switch (ch) {
      case '"':
        inString = true;
        break;
      case "{":
      case "[":
        depth++;
        break;
      case "}":
      case "]":
        if (depth === 0) return body.slice(start, i); // enclosing container closed
        depth--;
        if (depth === 0) return body.slice(start, i + 1);
        break;
      case ",":
        if (depth === 0) return body.slice(start, i);
        break;
    }
  }
  if (depth === 0) return body.slice(start);
  throw new Error("unbalanced JSON value");
}

export async function sha256Hex(text: string): Promise<string> {
  const data = new TextEncoder().encode(text);
  const digest = await crypto.subtle.digest("SHA-256", data);
  return Array.from(new Uint8Array(digest))
    .map((b) => b.toString(16).padStart(2, "0"))
    .join("");
}

/** Hash matching `sha256(file bytes)` of the CLI's canonical result file. */
export async function resultFileHash(responseBody: string): Promise<string> {
  return sha256Hex(extractTopLevelValue(responseBody, "result") + "\n");
}
