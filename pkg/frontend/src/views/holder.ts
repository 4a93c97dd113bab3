// Holder view: both credentials as QR text plus PNG links, and the
// profile privacy toggles.

import { ApiError, VaxApi } from '../api.js';
import { escapeHtml } from './approval.js';

export interface CredentialCard {
  kind: 'test' | 'passport';
  text: string | null;
  error: string | null;
}

export async function loadCredential(api: VaxApi, kind: 'test' | 'passport'): Promise<CredentialCard> {
  try {
    const text = await api.certificateText(kind);
    return { kind, text, error: null };
  } catch (err) {
    if (err instanceof ApiError) {
      return { kind, text: null, error: `${err.error}: ${err.detail}` };
    }
    throw err;
  }
}

export function renderCredential(card: CredentialCard, baseUrl: string): string {
  const title = card.kind === 'test' ? 'Test certificate (QR1)' : 'Vaccine passport (QR2)';
  if (card.error) {
    return `<section class="credential"><h3>${title}</h3><p class="error">${escapeHtml(card.error)}</p></section>`;
  }
  return `
  <section class="credential">
    <h3>${title}</h3>
    <img alt="${title}" src="${baseUrl}/certificates/${card.kind}?format=png" />
    <textarea readonly class="qr-text">${escapeHtml(card.text ?? '')}</textarea>
  </section>`;
}

export const PERMISSION_FIELDS = [
  'name',
  'age',
  'location',
  'photo',
  'test_result',
  'vaccination_status',
] as const;

export async function savePermissions(
  api: VaxApi,
  holderId: string,
  mask: Record<string, boolean>,
): Promise<string> {
  try {
    await api.setPermissions(holderId, mask);
    return 'Privacy settings saved.';
  } catch (err) {
    if (err instanceof ApiError) {
      return `${err.error}: ${err.detail}`;
    }
    throw err;
  }
}

export function renderPermissionForm(mask: Record<string, boolean>): string {
  const boxes = PERMISSION_FIELDS.map(
    (field) => `
    <label>
      <input type="checkbox" name="${field}" ${mask[field] === false ? '' : 'checked'} />
      show ${field.replace('_', ' ')}
    </label>`,
  ).join('');
  return `
  <form data-form="permissions">
    <h3>Profile privacy</h3>
    ${boxes}
    <button type="submit">Save</button>
  </form>`;
}
