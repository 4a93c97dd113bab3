// Single-page shell: sign-in, role-gated hash routing, event polling.

import { ApiError, VaxApi } from './api.js';
import { canvasImageDecoder } from './qrfile.js';
import { canView, routesVisible, type Route, type ViewSession } from './session.js';
import {
  decide,
  initialApprovalState,
  refreshQueue,
  renderApprovalQueue,
  triggerPrioritisation,
  type ApprovalState,
} from './views/approval.js';
import { assessEligibility, pushDose, renderVerdict } from './views/console.js';
import { loadCredential, renderCredential, renderPermissionForm, savePermissions, PERMISSION_FIELDS } from './views/holder.js';
import { renderIssuerForm, submitResult } from './views/issuer.js';
import { renderScan, scanFile } from './views/verifier.js';

const BASE_URL = (window as { VAXLEDGER_URL?: string }).VAXLEDGER_URL ?? '';
const POLL_MS = 2000;

const api = new VaxApi(BASE_URL);
let session: ViewSession | null = null;
let approvalState: ApprovalState = initialApprovalState();
let pollTimer: number | null = null;

function el(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found;
}

function currentRoute(): Route {
  const hash = window.location.hash.replace('#', '') as Route;
  const visible = routesVisible(session);
  return visible.includes(hash) ? hash : visible[visible.length - 1];
}

function renderNav(): void {
  const links = routesVisible(session)
    .map((route) => `<a href="#${route}" data-route="${route}">${route}</a>`)
    .join(' ');
  const who = session ? `${session.role} ${session.actorId}` : 'not signed in';
  el('nav').innerHTML = `${links} <span class="who">${who}</span>`;
}

async function renderRoute(): Promise<void> {
  const route = currentRoute();
  renderNav();
  const view = el('view');
  if (!canView(session, route)) {
    view.innerHTML = '<p class="error">This role cannot open that page.</p>';
    return;
  }
  switch (route) {
    case 'approvals': {
      approvalState = await refreshQueue(api, approvalState);
      view.innerHTML = renderApprovalQueue(approvalState);
      wireApprovals(view);
      startPolling();
      break;
    }
    case 'results': {
      view.innerHTML = renderIssuerForm(null);
      wireIssuer(view);
      break;
    }
    case 'console': {
      view.innerHTML = `
        <section class="console">
          <h2>Inoculation console</h2>
          <form data-form="lookup">
            <label>Holder ID <input name="holder_id" required /></label>
            <label>Vaccine ID <input name="vaccine_id" required /></label>
            <label>Holder QR1 text <textarea name="certificate" required></textarea></label>
            <button type="submit">Check eligibility</button>
          </form>
          <div id="verdict"></div>
        </section>`;
      wireConsole(view);
      break;
    }
    case 'credentials': {
      const test = await loadCredential(api, 'test');
      const passport = await loadCredential(api, 'passport');
      view.innerHTML =
        renderCredential(test, BASE_URL) +
        renderCredential(passport, BASE_URL) +
        renderPermissionForm({});
      wirePermissions(view);
      break;
    }
    case 'verify': {
      view.innerHTML = `
        <section class="verifier">
          <h2>Verify a credential</h2>
          <input type="file" id="scan-file" accept=".png,.jpg,.txt" />
          <div id="scan-outcome">${renderScan(null)}</div>
        </section>`;
      wireVerifier(view);
      break;
    }
  }
}

function wireApprovals(view: HTMLElement): void {
  view.querySelectorAll('button[data-action]').forEach((button) => {
    button.addEventListener('click', async () => {
      const action = button.getAttribute('data-action');
      if (action === 'prioritise') {
        approvalState = await triggerPrioritisation(api, approvalState);
      } else if (action === 'approve' || action === 'reject') {
        const actor = button.getAttribute('data-actor');
        if (actor) approvalState = await decide(api, approvalState, actor, action);
      }
      view.innerHTML = renderApprovalQueue(approvalState);
      wireApprovals(view);
    });
  });
}

function startPolling(): void {
  if (pollTimer !== null) return;
  pollTimer = window.setInterval(async () => {
    if (currentRoute() !== 'approvals') return;
    const before = approvalState.cursor;
    approvalState = await refreshQueue(api, approvalState);
    if (approvalState.cursor !== before || approvalState.expired) {
      const view = el('view');
      view.innerHTML = renderApprovalQueue(approvalState);
      wireApprovals(view);
    }
  }, POLL_MS);
}

function wireIssuer(view: HTMLElement): void {
  const form = view.querySelector('form[data-form="issue"]') as HTMLFormElement;
  form.addEventListener('submit', async (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const outcome = await submitResult(
      api,
      String(data.get('holder_id')),
      data.get('result') === 'Positive' ? 'Positive' : 'Negative',
    );
    view.innerHTML = renderIssuerForm(outcome);
    wireIssuer(view);
  });
}

function wireConsole(view: HTMLElement): void {
  const form = view.querySelector('form[data-form="lookup"]') as HTMLFormElement;
  form.addEventListener('submit', async (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const holderId = String(data.get('holder_id'));
    const vaccineId = String(data.get('vaccine_id'));
    const certificate = String(data.get('certificate'));
    let campaign;
    try {
      campaign = await api.campaign();
    } catch (err) {
      el('verdict').innerHTML = `<p class="error">${err instanceof ApiError ? err.message : String(err)}</p>`;
      return;
    }
    const { vaccines } = await api.vaccines();
    const verdict = assessEligibility(campaign, vaccines, holderId, vaccineId);
    el('verdict').innerHTML = renderVerdict(verdict);
    const push = el('verdict').querySelector('button[data-action="push"]');
    push?.addEventListener('click', async () => {
      const outcome = await pushDose(api, holderId, vaccineId, certificate);
      el('verdict').innerHTML =
        renderVerdict(verdict) +
        `<p class="${outcome.ok ? 'notice' : 'error'}">${outcome.message}</p>`;
    });
  });
}

function wirePermissions(view: HTMLElement): void {
  const form = view.querySelector('form[data-form="permissions"]') as HTMLFormElement | null;
  if (!form || !session) return;
  const holderId = session.actorId;
  form.addEventListener('submit', async (event) => {
    event.preventDefault();
    const mask: Record<string, boolean> = {};
    for (const field of PERMISSION_FIELDS) {
      const box = form.querySelector(`input[name="${field}"]`) as HTMLInputElement;
      mask[field] = box.checked;
    }
    const message = await savePermissions(api, holderId, mask);
    alert(message);
  });
}

function wireVerifier(view: HTMLElement): void {
  const input = view.querySelector('#scan-file') as HTMLInputElement;
  input.addEventListener('change', async () => {
    const file = input.files?.[0];
    if (!file) return;
    const bytes = new Uint8Array(await file.arrayBuffer());
    const outcome = await scanFile(api, file.name, bytes, canvasImageDecoder);
    el('scan-outcome').innerHTML = renderScan(outcome);
  });
}

function wireSignin(): void {
  const form = el('signin-form') as HTMLFormElement;
  form.addEventListener('submit', async (event) => {
    event.preventDefault();
    const data = new FormData(form);
    try {
      const res = await api.signin(
        String(data.get('wallet')),
        String(data.get('sid')),
        String(data.get('password')),
      );
      session = { token: res.token, actorId: res.actor_id, role: res.flag };
      el('signin').hidden = true;
      await renderRoute();
    } catch (err) {
      el('signin-error').textContent =
        err instanceof ApiError ? `${err.error}: ${err.detail}` : String(err);
    }
  });
}

window.addEventListener('hashchange', () => void renderRoute());
window.addEventListener('DOMContentLoaded', () => {
  wireSignin();
  void renderRoute(); // public verify page works without a session
});
