// Issuer desk: record a covid test result for a holder.

import { ApiError, VaxApi } from '../api.js';
import { escapeHtml } from './approval.js';

export interface IssueOutcome {
  ok: boolean;
  message: string;
}

export async function submitResult(
  api: VaxApi,
  holderId: string,
  result: 'Positive' | 'Negative',
): Promise<IssueOutcome> {
  try {
    await api.issueResult(holderId, result);
    return { ok: true, message: `Recorded ${result} for ${holderId}` };
  } catch (err) {
    if (err instanceof ApiError) {
      return { ok: false, message: `${err.error}: ${err.detail}` };
    }
    throw err;
  }
}

export function renderIssuerForm(outcome: IssueOutcome | null): string {
  const notice = outcome
    ? `<p class="${outcome.ok ? 'notice' : 'error'}">${escapeHtml(outcome.message)}</p>`
    : '';
  return `
  <section class="issuer">
    <h2>Issue test result</h2>
    ${notice}
    <form data-form="issue">
      <label>Holder ID <input name="holder_id" required /></label>
      <label><input type="radio" name="result" value="Negative" checked /> Negative</label>
      <label><input type="radio" name="result" value="Positive" /> Positive</label>
      <button type="submit">Issue</button>
    </form>
  </section>`;
}
