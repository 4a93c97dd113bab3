// Builds registry fixtures over the live API, nothing else.

import { randomUUID } from 'node:crypto';
import { VaxApi } from '../src/api.js';

export const DIVISIONS = [
  'Barisal', 'Chattogram', 'Dhaka', 'Khulna',
  'Mymensingh', 'Rajshahi', 'Rangpur', 'Sylhet',
] as const;

export interface SeededActor {
  sid: string;
  wallet: string;
  password: string;
  api: VaxApi; // signed-in client for this actor
}

export class Seeder {
  readonly authority: VaxApi;

  constructor(
    readonly baseUrl: string,
    readonly authoritySid: string,
  ) {
    this.authority = new VaxApi(baseUrl);
  }

  async signinAuthority(): Promise<void> {
    await this.authority.signin('0xA0', this.authoritySid, 'boot-secret');
  }

  private async onboard(
    role: string,
    profile: Record<string, unknown>,
  ): Promise<SeededActor> {
    const wallet = `0x${randomUUID().replaceAll('-', '')}`;
    const password = `pw-${wallet.slice(0, 10)}`;
    const anon = new VaxApi(this.baseUrl);
    const { actor_id } = await anon.signup(role, wallet, profile, password);
    const approval = await this.authority.approve(actor_id, 'approve');
    if (approval.status !== 'Approved') {
      throw new Error(`seeding failed: ${actor_id} is ${approval.status}`);
    }
    const api = new VaxApi(this.baseUrl);
    await api.signin(wallet, actor_id, password);
    return { sid: actor_id, wallet, password, api };
  }

  holder(division: string, name = 'Seeded Holder'): Promise<SeededActor> {
    return this.onboard('Holder', {
      name,
      age: 30,
      division,
      nid: 'NID000',
    });
  }

  issuer(): Promise<SeededActor> {
    return this.onboard('Issuer', { name: 'Seeded Lab', licence: 'LAB00' });
  }

  provider(): Promise<SeededActor> {
    return this.onboard('VaccineProvider', { name: 'Seeded Hospital', licence: 'HOSP00' });
  }

  async vaccine(name: string, storage: number, doseLimit: number): Promise<string> {
    const record = await this.authority.addVaccine(name, storage, doseLimit);
    return record.vaccine_id;
  }
}

export function uniqueName(prefix: string): string {
  return `${prefix}-${randomUUID().slice(0, 8)}`;
}
