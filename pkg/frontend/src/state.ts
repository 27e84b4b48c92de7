/** View model and controller for the review console.
 *
 * No client-side state is authoritative: every mutation round-trips through
 * the service, the submitted revision always equals the one on screen, and
 * a 409 flips the stalePrompt flag so the UI can offer reload-and-retry.
 */
import { OfflineError, ReviewApi, StaleRevisionError } from "./api.js";
import type { Decision, ItemDetail, QueueEntry, Score, Scores, StatsSnapshot } from "./types.js";

export type Screen = "queue" | "item" | "stats";

export interface VerdictForm {
  decision: Decision | null;
  correctness: Score | null;
  completeness: Score | null;
  clarity: Score | null;
}

export interface AppState {
  raterId: string;
  screen: Screen;
  queue: QueueEntry[];
  item: ItemDetail | null;
  form: VerdictForm;
  focusPanel: string | null;
  stats: StatsSnapshot | null;
  offline: boolean;
  stalePrompt: boolean;
  notice: string | null;
  /** quality-assessment mode requires all three 1/3/5 scores */
  requireScores: boolean;
}

export const LEGAL_SCORES: readonly Score[] = [1, 3, 5];

export function emptyForm(): VerdictForm {
  return { decision: null, correctness: null, completeness: null, clarity: null };
}

export function initialState(raterId: string, requireScores = false): AppState {
  return {
    raterId,
    screen: "queue",
    queue: [],
    item: null,
    form: emptyForm(),
    focusPanel: null,
    stats: null,
    offline: false,
    stalePrompt: false,
    notice: null,
    requireScores,
  };
}

/** The form is usable only with an item on screen at a known revision. */
export function formEnabled(state: AppState): boolean {
  return state.item !== null && Number.isInteger(state.item.revision) && !state.stalePrompt;
}

export function formScores(form: VerdictForm): Scores | null {
  const { correctness, completeness, clarity } = form;
  if (correctness === null && completeness === null && clarity === null) {
    return null;
  }
  if (correctness === null || completeness === null || clarity === null) {
    throw new Error("scores are all-or-nothing: set all three or none");
  }
  return { correctness, completeness, clarity };
}

export function validateForm(state: AppState): string | null {
  if (!formEnabled(state)) return "no item loaded";
  if (state.form.decision === null) return "pick accept or reject";
  try {
    const scores = formScores(state.form);
    if (state.requireScores && scores === null) {
      return "quality-assessment mode requires all three scores";
    }
  } catch (error) {
    return (error as Error).message;
  }
  return null;
}

export class ReviewController {
  readonly state: AppState;
  private listeners: Array<(state: AppState) => void> = [];

  constructor(private readonly api: ReviewApi, raterId: string, requireScores = false) {
    this.state = initialState(raterId, requireScores);
  }

  onChange(listener: (state: AppState) => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private async guard<T>(work: () => Promise<T>): Promise<T | null> {
    try {
      const result = await work();
      this.state.offline = false;
      return result;
    } catch (error) {
      if (error instanceof OfflineError) {
        this.state.offline = true;
        this.notify();
        return null;
      }
      throw error;
    }
  }

  async loadQueue(): Promise<void> {
    const queue = await this.guard(() => this.api.queue(this.state.raterId));
    if (queue === null) return;
    this.state.queue = queue;
    this.state.screen = "queue";
    this.state.item = null;
    this.state.form = emptyForm();
    this.state.stalePrompt = false;
    this.notify();
  }

  async openItem(itemId: string): Promise<void> {
    const item = await this.guard(() => this.api.item(itemId));
    if (item === null) return;
    this.state.item = item;
    this.state.screen = "item";
    this.state.form = emptyForm();
    this.state.focusPanel = null;
    this.state.stalePrompt = false;
    this.state.notice = null;
    this.notify();
  }

  setDecision(decision: Decision): void {
    if (!formEnabled(this.state)) return;
    this.state.form.decision = decision;
    this.notify();
  }

  setScore(dimension: keyof Scores, value: number): void {
    if (!formEnabled(this.state)) return;
    if (!LEGAL_SCORES.includes(value as Score)) {
      this.state.notice = `illegal score ${value}; legal values are 1, 3, 5`;
      this.notify();
      return;
    }
    this.state.form[dimension] = value as Score;
    this.state.notice = null;
    this.notify();
  }

  toggleFocusPanel(panelId: string): void {
    this.state.focusPanel = this.state.focusPanel === panelId ? null : panelId;
    this.notify();
  }

  /** Submit at exactly the revision on screen; 409 raises the stale prompt. */
  async submitVerdict(): Promise<boolean> {
    const problem = validateForm(this.state);
    if (problem !== null) {
      this.state.notice = problem;
      this.notify();
      return false;
    }
    const item = this.state.item!;
    const scores = formScores(this.state.form);
    try {
      const response = await this.api.submitVerdict(
        item.item_id,
        this.state.raterId,
        this.state.form.decision!,
        item.revision,
        scores,
      );
      this.state.notice = `verdict recorded; item now ${response.state}`;
      await this.loadQueue();
      return true;
    } catch (error) {
      if (error instanceof StaleRevisionError) {
        this.state.stalePrompt = true;
        this.state.notice = `stale submission: ${error.message}`;
        this.notify();
        return false;
      }
      if (error instanceof OfflineError) {
        this.state.offline = true;
        this.notify();
        return false;
      }
      throw error;
    }
  }

  /** Reload the item after a 409; the user re-reviews at the new revision. */
  async reloadStaleItem(): Promise<void> {
    const item = this.state.item;
    if (item === null) return;
    await this.openItem(item.item_id);
  }

  async loadStats(): Promise<void> {
    const stats = await this.guard(() => this.api.stats());
    if (stats === null) return;
    this.state.stats = stats;
    this.state.screen = "stats";
    this.notify();
  }
}
