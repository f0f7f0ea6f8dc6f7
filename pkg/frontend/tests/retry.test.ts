// @vitest-environment happy-dom
import { beforeEach, describe, expect, it } from 'vitest';

import { StudyClient } from '../src/api';
import { runPairwiseFlow } from '../src/pairwise';
import { click, waitFor } from './helpers';
import { MockStudyServer } from './mockServer';

let server: MockStudyServer;
let root: HTMLElement;

beforeEach(() => {
  server = new MockStudyServer();
  root = document.createElement('div');
  document.body.replaceChildren(root);
});

describe('network failures', () => {
  it('surfaces a fetch failure with a retry that resumes the flow', async () => {
    let failuresLeft = 1;
    const flaky: typeof fetch = (input, init) => {
      const path = new URL(String(input), 'http://mock').pathname;
      if (failuresLeft > 0 && path.endsWith('/next')) {
        failuresLeft -= 1;
        return Promise.reject(new TypeError('network down'));
      }
      return server.fetch(input, init);
    };
    const client = new StudyClient('', flaky);
    const session = await client.createSession({ participant: 'p1', study: 'pairwise' });
    void runPairwiseFlow(root, client, session);

    const banner = await waitFor(() => root.querySelector('.error-banner'), 'error banner');
    expect(banner.textContent).toContain('network down');
    expect(root.querySelector('.panels')).toBeNull();

    click(banner.querySelector('button.retry')!);
    click(await waitFor(() => root.querySelector('button.continue'), 'role framing'));
    await waitFor(() => root.querySelector('.panels'), 'first task after retry');
    expect(root.querySelector('.error-banner')).toBeNull();
  });
});
