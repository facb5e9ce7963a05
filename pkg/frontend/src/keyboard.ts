// Keyboard shortcuts: digits 1..k select the k label options in order.

export function keyToOptionIndex(key: string, optionCount: number): number | null {
  if (!/^[1-9]$/.test(key)) return null;
  const index = Number(key) - 1;
  return index < optionCount ? index : null;
}
