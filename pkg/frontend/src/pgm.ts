/** Binary PGM (P5) decoding for the base64 image payloads. */

export interface PgmImage {
  width: number;
  height: number;
  maxval: number;
  pixels: Uint8ClampedArray;
}

function base64ToBytes(b64: string): Uint8Array {
  const binary = atob(b64);
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) bytes[i] = binary.charCodeAt(i);
  return bytes;
}

const WHITESPACE = new Set([0x20, 0x09, 0x0a, 0x0d, 0x0b, 0x0c]);

/** Reads the next header token, skipping whitespace and # comments. */
function nextToken(bytes: Uint8Array, pos: number): [string, number] {
  while (pos < bytes.length) {
    if (WHITESPACE.has(bytes[pos])) {
      pos++;
    } else if (bytes[pos] === 0x23) {
      while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
    } else {
      break;
    }
  }
  const start = pos;
  while (pos < bytes.length && !WHITESPACE.has(bytes[pos])) pos++;
  if (start === pos) throw new Error("truncated PGM header");
  let token = "";
  for (let i = start; i < pos; i++) token += String.fromCharCode(bytes[i]);
  return [token, pos];
}

export function decodePgm(bytes: Uint8Array): PgmImage {
  let pos: number;
  let token: string;
  [token, pos] = nextToken(bytes, 0);
  if (token !== "P5") throw new Error(`not a binary PGM: magic ${token}`);
  [token, pos] = nextToken(bytes, pos);
  const width = parseInt(token, 10);
  [token, pos] = nextToken(bytes, pos);
  const height = parseInt(token, 10);
  [token, pos] = nextToken(bytes, pos);
  const maxval = parseInt(token, 10);
  if (!(width > 0) || !(height > 0) || !(maxval > 0) || maxval > 255) {
    throw new Error(`bad PGM header: ${width}x${height} maxval ${maxval}`);
  }
  pos++; // single whitespace byte after maxval
  const n = width * height;
  if (bytes.length - pos < n) {
    throw new Error(`PGM payload too short: need ${n}, have ${bytes.length - pos}`);
  }
  return {
    width,
    height,
    maxval,
    pixels: new Uint8ClampedArray(bytes.buffer, bytes.byteOffset + pos, n),
  };
}

export function decodeBase64Pgm(b64: string): PgmImage {
  return decodePgm(base64ToBytes(b64));
}
