// Study-2 flow: role framing first, then one explanation per task rated on
// all seven questions. The server owns the plan; this flow only renders the
// current task and submits complete answer sets.

import { ApiError, RatingTask, SessionInfo, StudyClient } from './api.js';
import {
  completionPage,
  el,
  errorBanner,
  highlightMissing,
  likertBlock,
  ratingTaskView,
  roleFramingPage,
} from './views.js';

export interface FlowOptions {
  // injectable clock so elapsed-time capture is testable
  now?: () => number;
}

export async function runRatingFlow(
  root: HTMLElement,
  client: StudyClient,
  session: SessionInfo,
  options: FlowOptions = {},
): Promise<void> {
  const now = options.now ?? (() => Date.now());
  for (;;) {
    let task;
    try {
      task = await client.nextTask(session);
    } catch (error) {
      await showRetry(root, error);
      continue;
    }
    if (task.done) {
      root.replaceChildren(completionPage('rating'));
      return;
    }
    const rating = task as RatingTask;
    if (rating.role_framing) {
      await showFraming(root, rating.role_framing);
    }
    await presentTask(root, client, session, rating, now);
  }
}

function showFraming(root: HTMLElement, text: string): Promise<void> {
  return new Promise((resolve) => {
    root.replaceChildren(roleFramingPage(text, resolve));
  });
}

function showRetry(root: HTMLElement, error: unknown): Promise<void> {
  const message = error instanceof Error ? error.message : String(error);
  return new Promise((resolve) => {
    root.replaceChildren(errorBanner(`Request failed: ${message}`, resolve));
  });
}

function presentTask(
  root: HTMLElement,
  client: StudyClient,
  session: SessionInfo,
  task: RatingTask,
  now: () => number,
): Promise<void> {
  return new Promise((resolve) => {
    const startedAt = now();
    const view = ratingTaskView(task);
    const submit = el('button', 'submit', 'Submit ratings');
    submit.disabled = true;

    // submit stays disabled until every question has an answer; once the
    // participant starts answering, the still-missing rows are highlighted
    const { element: block, state } = likertBlock(task.instrument, task.scale, () => {
      submit.disabled = !state.complete();
      highlightMissing(block, state.missing());
    });
    view.appendChild(block);
    view.appendChild(submit);
    root.replaceChildren(view);

    submit.addEventListener('click', async () => {
      if (!state.complete()) {
        highlightMissing(block, state.missing());
        return;
      }
      submit.disabled = true; // suppress duplicate submits while in flight
      try {
        await client.submit(session, {
          scenario_id: task.scenario.id,
          answers: state.answers,
          elapsed_s: (now() - startedAt) / 1000,
        });
        resolve();
      } catch (error) {
        if (error instanceof ApiError && error.code === 'DuplicateResponse') {
          resolve(); // already stored server-side; move on
          return;
        }
        view.appendChild(
          errorBanner(`Could not submit: ${(error as Error).message}`, () => resolve()),
        );
        submit.disabled = !state.complete();
      }
    });
  });
}
