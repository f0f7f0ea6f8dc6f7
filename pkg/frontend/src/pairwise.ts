// Study-1 flow: two explanation panels per task, exactly one selectable,
// submission disabled until a choice exists. Panels are only ever labelled
// A and B; the client never learns what kind of explanation either one is.

import { ApiError, PairwiseTask, SessionInfo, StudyClient } from './api.js';
import {
  completionPage,
  el,
  errorBanner,
  explanationPanel,
  pairwiseTaskView,
  roleFramingPage,
} from './views.js';

export async function runPairwiseFlow(
  root: HTMLElement,
  client: StudyClient,
  session: SessionInfo,
): Promise<void> {
  for (;;) {
    let task;
    try {
      task = await client.nextTask(session);
    } catch (error) {
      await showRetry(root, error);
      continue;
    }
    if (task.done) {
      root.replaceChildren(completionPage('pairwise'));
      return;
    }
    const pairwise = task as PairwiseTask;
    if (pairwise.role_framing) {
      await new Promise<void>((resolve) => {
        root.replaceChildren(roleFramingPage(pairwise.role_framing as string, resolve));
      });
    }
    await presentTask(root, client, session, pairwise);
  }
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
  task: PairwiseTask,
): Promise<void> {
  return new Promise((resolve) => {
    const view = pairwiseTaskView(task);
    const submit = el('button', 'submit', 'Submit choice');
    submit.disabled = true; // no default selection, ever
    let choice: 'A' | 'B' | null = null;

    const panels = el('div', 'panels');
    for (const panel of task.panels) {
      const wrapper = explanationPanel(panel.text, true);
      wrapper.dataset.side = panel.side;
      wrapper.setAttribute('role', 'button');
      wrapper.addEventListener('click', () => {
        choice = panel.side;
        submit.disabled = false;
        for (const other of Array.from(panels.children)) {
          other.classList.toggle(
            'selected',
            (other as HTMLElement).dataset.side === panel.side,
          );
        }
      });
      panels.appendChild(wrapper);
    }
    view.appendChild(panels);
    view.appendChild(submit);
    root.replaceChildren(view);

    submit.addEventListener('click', async () => {
      if (choice === null) return;
      submit.disabled = true; // suppress duplicate submits while in flight
      try {
        await client.submit(session, { scenario_id: task.scenario.id, choice });
        resolve();
      } catch (error) {
        if (error instanceof ApiError && error.code === 'DuplicateResponse') {
          resolve();
          return;
        }
        view.appendChild(
          errorBanner(`Could not submit: ${(error as Error).message}`, () => resolve()),
        );
        submit.disabled = false;
      }
    });
  });
}
