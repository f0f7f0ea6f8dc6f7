// @vitest-environment happy-dom
import { beforeEach, describe, expect, it } from 'vitest';

import { StudyClient } from '../src/api';
import { runRatingFlow } from '../src/rating';
import { answerAll, click, flush, waitFor } from './helpers';
import { MockStudyServer } from './mockServer';

let server: MockStudyServer;
let root: HTMLElement;

beforeEach(() => {
  server = new MockStudyServer();
  root = document.createElement('div');
  document.body.replaceChildren(root);
});

async function startedFlow(nowValues?: number[]) {
  const client = new StudyClient('', server.fetch);
  const session = await client.createSession({ participant: 'p1', study: 'rating' });
  let tick = 0;
  const now =
    nowValues === undefined ? undefined : () => nowValues[Math.min(tick++, nowValues.length - 1)]!;
  const finished = runRatingFlow(root, client, session, { now });
  return { client, session, finished };
}

describe('rating flow', () => {
  it('shows the role framing before the first task', async () => {
    const { finished } = await startedFlow();
    const framing = await waitFor(() => root.querySelector('.role-framing'), 'framing page');
    expect(framing.textContent).toContain('Imagine you are the loan applicant.');
    expect(root.querySelector('.likert-block')).toBeNull();
    click(framing.querySelector('button.continue')!);
    await waitFor(() => root.querySelector('.likert-block'), 'first task');
    expect(finished).toBeInstanceOf(Promise);
  });

  it('renders the seven questions in order with nothing pre-selected', async () => {
    await startedFlow();
    click(await waitFor(() => root.querySelector('button.continue'), 'continue'));
    await waitFor(() => root.querySelector('.likert-block'), 'task');
    const rows = Array.from(root.querySelectorAll<HTMLElement>('.likert-row'));
    expect(rows.map((r) => r.dataset.question)).toEqual([
      'Q1', 'Q2', 'Q3', 'Q4', 'Q5', 'Q6', 'Q7',
    ]);
    const checked = root.querySelectorAll('input:checked');
    expect(checked.length).toBe(0);
    // the explanation type's name is nowhere in the page
    for (const kind of ['counterfactual', 'directive', 'prototypical']) {
      expect(root.textContent).not.toContain(kind);
    }
  });

  it('keeps submit disabled and highlights missing rows until all answered', async () => {
    await startedFlow();
    click(await waitFor(() => root.querySelector('button.continue'), 'continue'));
    await waitFor(() => root.querySelector('.likert-block'), 'task');
    const submit = root.querySelector<HTMLButtonElement>('button.submit')!;
    expect(submit.disabled).toBe(true);

    // answer a single question: still disabled, the other six highlighted
    const firstRow = root.querySelector('.likert-row')!;
    click(firstRow.querySelectorAll('input')[4]!);
    await flush();
    expect(submit.disabled).toBe(true);
    expect(root.querySelectorAll('.likert-row.missing').length).toBe(6);

    answerAll(root, 3);
    await flush();
    expect(submit.disabled).toBe(false);
    expect(root.querySelectorAll('.likert-row.missing').length).toBe(0);
  });

  it('completes three tasks and stores 21 answers', async () => {
    const { finished } = await startedFlow();
    click(await waitFor(() => root.querySelector('button.continue'), 'continue'));
    for (let task = 0; task < 3; task += 1) {
      await waitFor(
        () => root.querySelector(`.rating-task .progress`)?.textContent?.includes(`Task ${task + 1}`)
          ? root
          : null,
        `task ${task + 1}`,
      );
      answerAll(root, ((task + 2) % 5) + 1);
      await flush();
      click(root.querySelector('button.submit')!);
      await flush();
    }
    await finished;
    expect(root.querySelector('.completed')).not.toBeNull();
    expect(server.ratings.length).toBe(3);
    const answers = server.ratings.flatMap((r) => Object.values(r.answers));
    expect(answers.length).toBe(21);
    // one response per explanation kind (the plan is a bijection)
    expect(new Set(server.ratings.map((r) => r.kind)).size).toBe(3);
  });

  it('captures elapsed time from the injected clock', async () => {
    // clock: task render at t=5000ms, submit at t=17500ms -> 12.5s
    await startedFlow([5000, 17_500, 20_000, 21_000, 30_000, 31_000]);
    click(await waitFor(() => root.querySelector('button.continue'), 'continue'));
    await waitFor(() => root.querySelector('.likert-block'), 'task');
    answerAll(root, 4);
    await flush();
    click(root.querySelector('button.submit')!);
    await waitFor(() => (server.ratings.length === 1 ? true : null), 'submission');
    expect(server.ratings[0]!.elapsed_s).toBeCloseTo(12.5, 6);
  });
});
