// Live round trip: drives the built flows against a real running service
// (`recourse serve`). Enabled by RECOURSE_BASE_URL; the Python test
// tests/test_frontend_roundtrip.py boots the server and runs this file.
//
// Runs in a plain node environment with a manually constructed happy-dom
// window so that global fetch stays Node's real HTTP client.

import { describe, expect, it } from 'vitest';
import { Window } from 'happy-dom';

import { StudyClient } from '../src/api';
import { runPairwiseFlow } from '../src/pairwise';
import { runRatingFlow } from '../src/rating';
import { answerAll, click, flush, waitFor } from './helpers';

const BASE = process.env.RECOURSE_BASE_URL;

function mountDom(): HTMLElement {
  const win = new Window();
  (globalThis as any).document = win.document;
  (globalThis as any).HTMLElement = win.HTMLElement;
  const root = win.document.createElement('div');
  win.document.body.appendChild(root);
  return root as unknown as HTMLElement;
}

describe.skipIf(!BASE)('live service round trip', () => {
  it('completes a full rating study', { timeout: 30_000 }, async () => {
    const root = mountDom();
    const client = new StudyClient(BASE!);
    const session = await client.createSession({
      participant: 'ui-rating',
      study: 'rating',
      seed: 42,
    });
    const finished = runRatingFlow(root, client, session);
    click(await waitFor(() => root.querySelector('button.continue'), 'framing', 2000));
    for (let task = 0; task < 3; task += 1) {
      await waitFor(
        () => root.querySelector('.progress')?.textContent?.includes(`Task ${task + 1}`)
          ? true
          : null,
        `task ${task + 1}`,
        2000,
      );
      answerAll(root, (task % 5) + 1);
      await flush();
      click(root.querySelector('button.submit')!);
      await flush();
    }
    await finished;
    expect(root.querySelector('.completed')).not.toBeNull();
  });

  it('completes a full pairwise study', { timeout: 30_000 }, async () => {
    const root = mountDom();
    const client = new StudyClient(BASE!);
    const session = await client.createSession({
      participant: 'ui-pairwise',
      study: 'pairwise',
      seed: 46,
    });
    const finished = runPairwiseFlow(root, client, session);
    click(await waitFor(() => root.querySelector('button.continue'), 'framing', 2000));
    for (let task = 0; task < 3; task += 1) {
      await waitFor(
        () => root.querySelector('.progress')?.textContent?.includes(`Task ${task + 1}`)
          ? true
          : null,
        `task ${task + 1}`,
        2000,
      );
      click(root.querySelector('.panel[data-side="A"]')!);
      click(root.querySelector('button.submit')!);
      await flush();
    }
    await finished;
    expect(root.querySelector('.completed')).not.toBeNull();
  });
});
