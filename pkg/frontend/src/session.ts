// Role-gated routing: a session sees exactly the routes its role may use.
// This mirrors the server's authorization matrix; the server remains the
// authority on every call.

import type { RoleFlag } from './api.js';

export interface ViewSession {
  token: string;
  actorId: string;
  role: RoleFlag;
}

export type Route = 'approvals' | 'results' | 'console' | 'credentials' | 'verify';

const ROUTE_ROLES: Record<Route, RoleFlag[] | null> = {
  approvals: ['authority'],
  results: ['issuer'],
  console: ['vaccine provider'],
  credentials: ['holder'],
  verify: null, // public: verifiers never register
};

export function routesVisible(session: ViewSession | null): Route[] {
  const routes: Route[] = [];
  for (const [route, roles] of Object.entries(ROUTE_ROLES) as [Route, RoleFlag[] | null][]) {
    if (roles === null || (session !== null && roles.includes(session.role))) {
      routes.push(route);
    }
  }
  return routes;
}

export function canView(session: ViewSession | null, route: Route): boolean {
  return routesVisible(session).includes(route);
}
