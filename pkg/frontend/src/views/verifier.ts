// Public verifier page: drop a QR image or payload text file, get the
// ledger's verdict. No registration, no session.

import { ApiError, VaxApi, type VerifyResponse } from '../api.js';
import { escapeHtml } from './approval.js';

export type ScanOutcome =
  | { kind: 'valid'; credential: string; fields: Record<string, unknown> }
  | { kind: 'invalid'; reason: string }
  | { kind: 'not-a-credential'; detail: string };

export async function scanText(api: VaxApi, text: string): Promise<ScanOutcome> {
  let report: VerifyResponse;
  try {
    report = await api.verify(text.trim());
  } catch (err) {
    if (err instanceof ApiError && err.status === 400) {
      return { kind: 'not-a-credential', detail: err.detail };
    }
    throw err;
  }
  if (report.valid) {
    return { kind: 'valid', credential: report.kind, fields: report.fields };
  }
  return { kind: 'invalid', reason: report.reason ?? 'unknown' };
}

export type ImageDecoder = (bytes: Uint8Array, mimeType: string) => Promise<string | null>;

// File-upload scanning is the mandatory path: .txt payloads directly,
// images through the supplied decoder (canvas + jsQR in the browser).
export async function scanFile(
  api: VaxApi,
  name: string,
  bytes: Uint8Array,
  decodeImage: ImageDecoder,
): Promise<ScanOutcome> {
  if (name.endsWith('.txt')) {
    return scanText(api, new TextDecoder().decode(bytes));
  }
  const mime = name.endsWith('.png') ? 'image/png' : 'image/jpeg';
  const text = await decodeImage(bytes, mime);
  if (text === null) {
    return { kind: 'not-a-credential', detail: 'no QR code found in the image' };
  }
  return scanText(api, text);
}

export function renderScan(outcome: ScanOutcome | null): string {
  if (outcome === null) {
    return '<div class="scan idle">Scan a test certificate (QR1) or vaccine passport (QR2).</div>';
  }
  if (outcome.kind === 'valid') {
    const rows = Object.entries(outcome.fields)
      .map(([k, v]) => `<dt>${escapeHtml(k)}</dt><dd>${escapeHtml(String(v))}</dd>`)
      .join('');
    return `
    <div class="scan valid" data-outcome="valid">
      <strong>Valid ${escapeHtml(outcome.credential)}</strong>
      <dl>${rows}</dl>
    </div>`;
  }
  if (outcome.kind === 'invalid') {
    return `
    <div class="scan invalid" data-outcome="invalid" data-reason="${escapeHtml(outcome.reason)}">
      <strong>INVALID — ${escapeHtml(outcome.reason)}</strong>
      <p>This credential does not match the ledger.</p>
    </div>`;
  }
  return `
  <div class="scan undecodable" data-outcome="not-a-credential">
    <strong>Not a credential</strong>
    <p>${escapeHtml(outcome.detail)}</p>
  </div>`;
}
