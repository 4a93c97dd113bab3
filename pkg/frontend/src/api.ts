// Typed client for the registry service JSON API. The UI mutates state
// exclusively through these calls; server error names pass through verbatim.

export type RoleFlag = 'authority' | 'issuer' | 'holder' | 'vaccine provider';

export interface SigninResponse {
  flag: RoleFlag;
  token: string;
  actor_id: string;
}

export interface PendingSignup {
  actor_id: string;
  role: string;
  wallet: string;
  profile: Record<string, unknown>;
}

export interface VaccineRecord {
  vaccine_id: string;
  name: string;
  storage: number;
  dose_limit: number;
}

export interface CampaignSnapshot {
  campaign_id: string;
  ranking: string[];
  holders: { holder_id: string; level: number }[];
  first_dose_remaining: Record<string, number>;
  completion_remaining: Record<string, number>;
  active: boolean;
  doses_given: number;
  list_digest: string;
}

export interface VerifyResponse {
  valid: boolean;
  reason: string | null;
  kind: string;
  fields: Record<string, unknown>;
}

export interface EventRecord {
  sequence: number;
  kind: string;
  affected: string[];
  tx_id: string;
}

export interface DoseResponse {
  holder_id: string;
  vaccine_id: string;
  dose_number: number;
  level: number;
  completed: boolean;
  tx_id: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly error: string,
    public readonly detail: string,
  ) {
    super(`${error}: ${detail}`);
  }
}

export class VaxApi {
  constructor(
    public readonly baseUrl: string,
    public token: string | null = null,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { Accept: 'application/json' };
    if (body !== undefined) headers['Content-Type'] = 'application/json';
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    const res = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      let error = `HTTP ${res.status}`;
      let detail = res.statusText;
      try {
        const parsed = (await res.json()) as { error?: string; detail?: string };
        if (parsed.error) error = parsed.error;
        if (parsed.detail) detail = parsed.detail;
      } catch {
        // non-JSON error body; keep the HTTP status text
      }
      throw new ApiError(res.status, error, detail);
    }
    return (await res.json()) as T;
  }

  signup(role: string, wallet: string, profile: Record<string, unknown>, password: string) {
    return this.request<{ actor_id: string; status: string }>('POST', '/signup', {
      role,
      wallet,
      profile,
      password,
    });
  }

  async signin(wallet: string, sid: string, password: string): Promise<SigninResponse> {
    const res = await this.request<SigninResponse>('POST', '/signin', {
      wallet,
      sid,
      password,
    });
    this.token = res.token;
    return res;
  }

  pendingSignups() {
    return this.request<{ pending: PendingSignup[] }>('GET', '/pending');
  }

  approve(actorId: string, decision: 'approve' | 'reject') {
    return this.request<{ actor_id: string; status: string; reason: string | null }>(
      'POST',
      '/approve',
      { actor_id: actorId, decision },
    );
  }

  issueResult(holderId: string, result: 'Positive' | 'Negative') {
    return this.request<Record<string, unknown>>('POST', '/results', {
      holder_id: holderId,
      result,
    });
  }

  vaccines() {
    return this.request<{ vaccines: VaccineRecord[] }>('GET', '/vaccines');
  }

  addVaccine(name: string, storage: number, doseLimit: number) {
    return this.request<VaccineRecord>('POST', '/vaccines', {
      name,
      storage,
      dose_limit: doseLimit,
    });
  }

  prioritise() {
    return this.request<CampaignSnapshot>('POST', '/prioritise');
  }

  campaign() {
    return this.request<CampaignSnapshot>('GET', '/campaign');
  }

  closeCampaign() {
    return this.request<CampaignSnapshot>('POST', '/campaign/close');
  }

  pushDose(holderId: string, vaccineId: string, certificate: string) {
    return this.request<DoseResponse>('POST', '/doses', {
      holder_id: holderId,
      vaccine_id: vaccineId,
      certificate,
    });
  }

  certificateText(kind: 'test' | 'passport'): Promise<string> {
    return this.requestText(`/certificates/${kind}?format=text`);
  }

  certificateJson(kind: 'test' | 'passport') {
    return this.request<{ payload: Record<string, unknown>; text: string }>(
      'GET',
      `/certificates/${kind}`,
    );
  }

  private async requestText(path: string): Promise<string> {
    const headers: Record<string, string> = {};
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    const res = await fetch(`${this.baseUrl}${path}`, { headers });
    if (!res.ok) {
      let error = `HTTP ${res.status}`;
      let detail = res.statusText;
      try {
        const parsed = (await res.json()) as { error?: string; detail?: string };
        if (parsed.error) error = parsed.error;
        if (parsed.detail) detail = parsed.detail;
      } catch {
        // keep defaults
      }
      throw new ApiError(res.status, error, detail);
    }
    return res.text();
  }

  verify(text: string) {
    return this.request<VerifyResponse>('POST', '/verify', { text });
  }

  setPermissions(holderId: string, mask: Record<string, boolean>) {
    return this.request<{ holder_id: string; mask: Record<string, boolean> }>(
      'PUT',
      `/holders/${holderId}/permissions`,
      mask,
    );
  }

  events(after: number) {
    return this.request<{ events: EventRecord[] }>('GET', `/events?after=${after}`);
  }

  stats(division: string) {
    return this.request<Record<string, unknown>>('GET', `/stats/${division}`);
  }

  ranking() {
    return this.request<{ ranked: { division: string; ratio: number }[]; untested: string[] }>(
      'GET',
      '/ranking',
    );
  }

  chainVerify() {
    return this.request<{ valid: boolean }>('GET', '/chain/verify');
  }
}
