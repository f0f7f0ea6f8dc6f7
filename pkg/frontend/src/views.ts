// Render helpers. Everything on screen comes straight from a service
// payload; nothing here invents, reorders, or pre-selects content.

import { PairwiseTask, Question, RatingTask, ScenarioPayload } from './api.js';

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function scenarioCard(scenario: ScenarioPayload): HTMLElement {
  const card = el('section', 'scenario-card');
  card.appendChild(el('h2', 'scenario-title', scenario.title));

  const table = el('table', 'profile-table');
  for (const [feature, value] of scenario.profile_rows) {
    const row = el('tr');
    row.appendChild(el('th', undefined, feature));
    row.appendChild(el('td', undefined, value));
    table.appendChild(row);
  }
  const decision = el('tr', 'decision-row');
  decision.appendChild(el('th', undefined, scenario.decision_header));
  decision.appendChild(el('td', undefined, scenario.decision_text));
  table.appendChild(decision);
  card.appendChild(table);

  card.appendChild(el('p', 'narrative', scenario.narrative));
  if (scenario.scale_notes) {
    const notes = el('pre', 'scale-notes', scenario.scale_notes);
    card.appendChild(notes);
  }
  return card;
}

export function explanationPanel(text: string, selectable = false): HTMLElement {
  const panel = el('div', selectable ? 'panel selectable' : 'panel');
  panel.appendChild(el('pre', 'panel-text', text));
  return panel;
}

export function progress(task: { task_index: number; n_tasks: number }): HTMLElement {
  return el('p', 'progress', `Task ${task.task_index + 1} of ${task.n_tasks}`);
}

export function roleFramingPage(text: string, onContinue: () => void): HTMLElement {
  const page = el('section', 'role-framing');
  page.appendChild(el('p', undefined, text));
  const button = el('button', 'continue', 'Continue');
  button.addEventListener('click', onContinue);
  page.appendChild(button);
  return page;
}

export interface LikertState {
  answers: Record<string, number>;
  complete(): boolean;
  missing(): string[];
}

// One radio row per question, in exactly the order the service sent them;
// no option is ever pre-checked.
export function likertBlock(
  questions: Question[],
  scale: { points: number; anchors: Record<string, string> },
  onChange: () => void,
): { element: HTMLElement; state: LikertState } {
  const answers: Record<string, number> = {};
  const block = el('div', 'likert-block');
  for (const question of questions) {
    const row = el('div', 'likert-row');
    row.dataset.question = question.id;
    row.appendChild(el('span', 'question-text', `${question.id}. ${question.text}`));
    const options = el('div', 'options');
    for (let value = 1; value <= scale.points; value += 1) {
      const label = el('label', 'option');
      const input = document.createElement('input');
      input.type = 'radio';
      input.name = question.id;
      input.value = String(value);
      input.addEventListener('change', () => {
        answers[question.id] = value;
        row.classList.remove('missing');
        onChange();
      });
      label.appendChild(input);
      const anchor = scale.anchors[String(value)];
      label.appendChild(
        el('span', 'anchor', anchor ? `${value} – ${anchor}` : String(value)),
      );
      options.appendChild(label);
    }
    row.appendChild(options);
    block.appendChild(row);
  }
  const state: LikertState = {
    answers,
    complete: () => questions.every((q) => q.id in answers),
    missing: () => questions.filter((q) => !(q.id in answers)).map((q) => q.id),
  };
  return { element: block, state };
}

export function highlightMissing(block: HTMLElement, missing: string[]): void {
  for (const row of Array.from(block.querySelectorAll<HTMLElement>('.likert-row'))) {
    row.classList.toggle('missing', missing.includes(row.dataset.question ?? ''));
  }
}

export function completionPage(study: string): HTMLElement {
  const page = el('section', 'completed');
  page.appendChild(el('h2', undefined, 'All done'));
  page.appendChild(
    el('p', undefined, `You have completed every task in the ${study} study. Thank you!`),
  );
  return page;
}

export function errorBanner(message: string, onRetry: () => void): HTMLElement {
  const banner = el('div', 'error-banner');
  banner.appendChild(el('span', undefined, message));
  const retry = el('button', 'retry', 'Retry');
  retry.addEventListener('click', onRetry);
  banner.appendChild(retry);
  return banner;
}

export function ratingTaskView(task: RatingTask): HTMLElement {
  const view = el('section', 'task rating-task');
  view.appendChild(progress(task));
  view.appendChild(scenarioCard(task.scenario));
  view.appendChild(el('h3', undefined, 'The system generated the following information:'));
  view.appendChild(explanationPanel(task.explanation.text));
  return view;
}

export function pairwiseTaskView(task: PairwiseTask): HTMLElement {
  const view = el('section', 'task pairwise-task');
  view.appendChild(progress(task));
  view.appendChild(scenarioCard(task.scenario));
  view.appendChild(el('h3', 'prompt', task.prompt));
  return view;
}
