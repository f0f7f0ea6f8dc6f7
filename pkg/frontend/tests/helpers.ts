// DOM-driving helpers for the flow tests.

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

export async function waitFor<T>(
  probe: () => T | null | undefined,
  what = 'condition',
  attempts = 200,
): Promise<T> {
  for (let i = 0; i < attempts; i += 1) {
    const got = probe();
    if (got !== null && got !== undefined) return got;
    await flush();
  }
  throw new Error(`timed out waiting for ${what}`);
}

export function click(element: Element): void {
  (element as HTMLElement).click();
}

export function answerAll(root: HTMLElement, value: number): void {
  for (const row of Array.from(root.querySelectorAll('.likert-row'))) {
    const input = row.querySelectorAll('input')[value - 1] as HTMLInputElement;
    input.click();
  }
}
