// Vaccine provider console: look a holder up, see an instant eligibility
// verdict, push a dose. The verdict here is advisory only; POST /doses is
// the authoritative check and its errors are surfaced verbatim.

import { ApiError, VaxApi, type CampaignSnapshot, type VaccineRecord } from '../api.js';
import { escapeHtml } from './approval.js';

export type Phase = 'first-dose' | 'completion' | 'finished';

export interface Verdict {
  eligible: boolean;
  reason: string | null;
  holderLevel: number | null;
  phase: Phase;
  phaseLevel: number | null;
  storage: number | null;
}

function lowestPendingLevel(counters: Record<string, number>): number | null {
  const pending = Object.entries(counters)
    .filter(([, count]) => count > 0)
    .map(([level]) => Number(level));
  return pending.length ? Math.min(...pending) : null;
}

export function assessEligibility(
  campaign: CampaignSnapshot,
  vaccines: VaccineRecord[],
  holderId: string,
  vaccineId: string,
): Verdict {
  const levelRow = campaign.holders.find((h) => h.holder_id === holderId);
  const holderLevel = levelRow ? levelRow.level : null;
  const firstLevel = lowestPendingLevel(campaign.first_dose_remaining);
  const completionLevel = lowestPendingLevel(campaign.completion_remaining);
  const phase: Phase =
    firstLevel !== null ? 'first-dose' : completionLevel !== null ? 'completion' : 'finished';
  const phaseLevel = phase === 'first-dose' ? firstLevel : completionLevel;
  const vaccine = vaccines.find((v) => v.vaccine_id === vaccineId) ?? null;
  const storage = vaccine ? vaccine.storage : null;

  const verdict = (eligible: boolean, reason: string | null): Verdict => ({
    eligible,
    reason,
    holderLevel,
    phase,
    phaseLevel,
    storage,
  });

  if (!campaign.active) return verdict(false, 'NoActiveCampaign');
  if (holderLevel === null) return verdict(false, 'HolderNotInCampaign');
  if (vaccine === null) return verdict(false, 'UnknownVaccine');
  if (storage !== null && storage < 1) return verdict(false, 'OutOfStock');
  if (phase === 'finished') return verdict(false, 'DoseLimitReached');
  if (holderLevel !== phaseLevel) {
    // the paper's rule: lower priority waits for every higher level
    return verdict(false, 'PriorityViolation');
  }
  return verdict(true, null);
}

export interface PushOutcome {
  ok: boolean;
  message: string;
  doseNumber: number | null;
  serverError: string | null;
}

export async function pushDose(
  api: VaxApi,
  holderId: string,
  vaccineId: string,
  certificateText: string,
): Promise<PushOutcome> {
  try {
    const dose = await api.pushDose(holderId, vaccineId, certificateText);
    const done = dose.completed ? ' — course complete, holder removed from the list' : '';
    return {
      ok: true,
      message: `Dose ${dose.dose_number} recorded for ${dose.holder_id}${done}`,
      doseNumber: dose.dose_number,
      serverError: null,
    };
  } catch (err) {
    if (err instanceof ApiError) {
      return {
        ok: false,
        message: `${err.error}: ${err.detail}`,
        doseNumber: null,
        serverError: err.error,
      };
    }
    throw err;
  }
}

export function renderVerdict(verdict: Verdict): string {
  const facts = `
    <dl class="facts">
      <dt>Holder level</dt><dd>${verdict.holderLevel ?? 'not in campaign'}</dd>
      <dt>Current phase</dt><dd>${verdict.phase} (level ${verdict.phaseLevel ?? '—'})</dd>
      <dt>Storage</dt><dd>${verdict.storage ?? 'unknown vaccine'}</dd>
    </dl>`;
  if (verdict.eligible) {
    return `
    <div class="verdict eligible" data-verdict="eligible">
      <strong>Eligible for inoculation</strong>
      ${facts}
      <button data-action="push">Push vaccine</button>
    </div>`;
  }
  const disabled = verdict.reason === 'OutOfStock' ? 'disabled' : '';
  return `
  <div class="verdict blocked" data-verdict="blocked" data-reason="${verdict.reason}">
    <strong>Blocked: ${escapeHtml(verdict.reason ?? '')}</strong>
    ${facts}
    <button data-action="push" ${disabled}>Push anyway (server decides)</button>
  </div>`;
}
