/**
 * Editor state and request scheduling.
 *
 * Two invariants live here and are contract-tested:
 *  - previews are monotone: a response for an older edit can never
 *    overwrite the preview of a newer one (each request carries a counter);
 *  - recolor traffic is debounced with at most one request in flight.
 */

export interface PreviewUpdate {
  counter: number;
  url: string;
}

export class PreviewState {
  private latestShown = 0;
  previewUrl: string | null = null;
  /** Called with the url that got displaced, so blob URLs can be revoked. */
  onReplaced: ((url: string) => void) | null = null;

  /** Accepts the update only if it is newer than what is displayed. */
  accept(update: PreviewUpdate): boolean {
    if (update.counter <= this.latestShown) return false;
    if (this.previewUrl !== null && this.onReplaced) this.onReplaced(this.previewUrl);
    this.latestShown = update.counter;
    this.previewUrl = update.url;
    return true;
  }

  get shownCounter(): number {
    return this.latestShown;
  }
}

/**
 * Trailing-edge debouncer with a single-flight guarantee.
 *
 * Edits arriving within `delayMs` collapse into one call; while a call is
 * in flight further edits are queued (latest wins) and dispatched once the
 * response lands.
 */
export class RecolorScheduler<A> {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pending: { args: A; counter: number } | null = null;
  private flying = false;
  private counter = 0;
  inFlight = 0;
  maxInFlight = 0;

  constructor(
    private send: (args: A, counter: number) => Promise<void>,
    private delayMs = 150,
  ) {}

  /** Schedules a recolor for the latest arguments; returns its counter. */
  request(args: A): number {
    this.counter += 1;
    this.pending = { args, counter: this.counter };
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.dispatch();
    }, this.delayMs);
    return this.counter;
  }

  private dispatch(): void {
    if (this.flying || this.pending === null) return;
    const { args, counter } = this.pending;
    this.pending = null;
    this.flying = true;
    this.inFlight += 1;
    this.maxInFlight = Math.max(this.maxInFlight, this.inFlight);
    this.send(args, counter).finally(() => {
      this.inFlight -= 1;
      this.flying = false;
      // an edit arrived while the request was flying; send the latest
      if (this.pending !== null && this.timer === null) this.dispatch();
    });
  }
}

export interface EditorState {
  jobId: string | null;
  controlPoints: number[][];
  knots: number[] | null;
  selectedPoint: number | null;
  dirty: boolean;
  histogram: number[] | null;
  selectedLibraryColormap: string | null;
}

export function freshEditorState(): EditorState {
  return {
    jobId: null,
    controlPoints: [],
    knots: null,
    selectedPoint: null,
    dirty: false,
    histogram: null,
    selectedLibraryColormap: null,
  };
}
