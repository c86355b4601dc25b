// Client-side store: view state plus a serialized mutation queue. The session
// document and every displayed number are refetched from the service after a
// mutation lands, so the UI is a pure function of (revision, view state). One
// mutation is in flight at a time; a 409 triggers a refresh-and-replay of the
// failed call against the fresh revision.

import { ApiClient, ApiError, type SessionState } from "./api.js";

export const SUBSYSTEMS = [
  "plant",
  "controller",
  "open_loop",
  "closed_loop",
  "sensitivity",
  "process_sensitivity",
  "control_sensitivity",
] as const;

export const VIEWS = ["bode", "nyquist", "nichols"] as const;

export interface ViewState {
  subsystem: (typeof SUBSYSTEMS)[number];
  view: (typeof VIEWS)[number];
  wrapPhase: boolean;
  visibleControllers: string[];
  activePane: "frequency" | "time";
}

export function defaultViewState(): ViewState {
  return {
    subsystem: "open_loop",
    view: "bode",
    wrapPhase: false,
    visibleControllers: [],
    activePane: "frequency",
  };
}

// keeps the visible set legal: at least one controller visible when any exist
export function normalizeVisible(all: string[], visible: string[]): string[] {
  const kept = visible.filter((name) => all.includes(name));
  if (kept.length === 0 && all.length > 0) return [all[0]];
  return kept;
}

type Mutation = (revision: number) => Promise<{ revision: number }>;

export class SessionStore {
  state: SessionState | null = null;
  view: ViewState = defaultViewState();
  private queue: Promise<void> = Promise.resolve();
  private listeners: Array<() => void> = [];

  constructor(public api: ApiClient) {}

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  async open(opts: { document?: unknown; demo?: boolean } = {}): Promise<void> {
    this.state = await this.api.createSession(opts);
    this.view.visibleControllers = normalizeVisible(
      this.controllerNames(),
      this.view.visibleControllers,
    );
    this.emit();
  }

  controllerNames(): string[] {
    return this.state?.document.controllers.map((c) => c.name) ?? [];
  }

  activeController(): string | null {
    return this.state?.document.active_controller ?? null;
  }

  get revision(): number {
    return this.state?.revision ?? 0;
  }

  /** Queue a mutation; on a stale-revision conflict, refresh and retry once. */
  mutate(fn: Mutation): Promise<void> {
    const run = async () => {
      if (!this.state) throw new Error("no session open");
      try {
        await fn(this.state.revision);
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          await this.refresh();
          await fn(this.state.revision);
        } else {
          throw err;
        }
      }
      await this.refresh();
    };
    this.queue = this.queue.then(run);
    return this.queue;
  }

  async refresh(): Promise<void> {
    if (!this.state) return;
    this.state = await this.api.getSession(this.state.session_id);
    this.view.visibleControllers = normalizeVisible(
      this.controllerNames(),
      this.view.visibleControllers,
    );
    this.emit();
  }

  setView(patch: Partial<ViewState>): void {
    this.view = { ...this.view, ...patch };
    this.view.visibleControllers = normalizeVisible(
      this.controllerNames(),
      this.view.visibleControllers,
    );
    this.emit();
  }
}
