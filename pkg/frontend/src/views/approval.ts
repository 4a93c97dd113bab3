// Authority dashboard: the signup approval queue and the prioritisation
// trigger. The queue refreshes from the event feed; approve/reject go
// through POST /approve and nothing else.

import { ApiError, VaxApi, type PendingSignup } from '../api.js';

export interface ApprovalState {
  pending: PendingSignup[];
  cursor: number; // last event sequence seen
  notice: string | null;
  expired: boolean;
}

export function initialApprovalState(): ApprovalState {
  return { pending: [], cursor: 0, notice: null, expired: false };
}

export async function refreshQueue(api: VaxApi, state: ApprovalState): Promise<ApprovalState> {
  try {
    const events = await api.events(state.cursor);
    const cursor = events.events.length
      ? events.events[events.events.length - 1].sequence
      : state.cursor;
    const { pending } = await api.pendingSignups();
    return { ...state, pending, cursor, expired: false };
  } catch (err) {
    if (err instanceof ApiError && err.status === 401) {
      return { ...state, expired: true, notice: 'Session expired, sign in again.' };
    }
    throw err;
  }
}

export async function decide(
  api: VaxApi,
  state: ApprovalState,
  actorId: string,
  decision: 'approve' | 'reject',
): Promise<ApprovalState> {
  try {
    const outcome = await api.approve(actorId, decision);
    const notice =
      outcome.status === 'Approved'
        ? `${actorId} approved`
        : `${actorId} ${outcome.status.toLowerCase()}${outcome.reason ? ` (${outcome.reason})` : ''}`;
    return await refreshQueue(api, { ...state, notice });
  } catch (err) {
    if (err instanceof ApiError) {
      if (err.status === 401) {
        return { ...state, expired: true, notice: 'Session expired, sign in again.' };
      }
      return { ...state, notice: `${err.error}: ${err.detail}` };
    }
    throw err;
  }
}

export async function triggerPrioritisation(api: VaxApi, state: ApprovalState): Promise<ApprovalState> {
  try {
    const snapshot = await api.prioritise();
    return {
      ...state,
      notice: `Campaign ${snapshot.campaign_id} created over ${snapshot.holders.length} holders`,
    };
  } catch (err) {
    if (err instanceof ApiError) {
      return { ...state, notice: `${err.error}: ${err.detail}` };
    }
    throw err;
  }
}

export function renderApprovalQueue(state: ApprovalState): string {
  if (state.expired) {
    return `<div class="error" data-expired="true">${state.notice ?? '401'}</div>`;
  }
  const rows = state.pending
    .map(
      (p) => `
    <tr data-actor="${p.actor_id}">
      <td>${escapeHtml(String(p.profile['name'] ?? ''))}</td>
      <td>${p.role}</td>
      <td>${p.wallet}</td>
      <td>
        <button data-action="approve" data-actor="${p.actor_id}">Approve</button>
        <button data-action="reject" data-actor="${p.actor_id}">Reject</button>
      </td>
    </tr>`,
    )
    .join('');
  const notice = state.notice ? `<p class="notice">${escapeHtml(state.notice)}</p>` : '';
  const empty = state.pending.length === 0 ? '<p class="empty">No pending sign-ups.</p>' : '';
  return `
  <section class="approvals">
    <h2>Pending sign-ups</h2>
    ${notice}
    <table><tbody>${rows}</tbody></table>
    ${empty}
    <button data-action="prioritise">Run prioritisation</button>
  </section>`;
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;');
}
