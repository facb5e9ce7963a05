// Seeded within-stratum task ordering, so the reviewer sees tasks in a
// reproducible but non-systematic order (avoids order effects).

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function seededShuffle<T>(items: readonly T[], seed: number): T[] {
  const out = items.slice();
  const rand = mulberry32(seed);
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

/** Order task ids stratum by stratum, shuffling within each stratum. */
export function orderWithinStrata(
  tasks: readonly { task_id: string; stratum: string }[],
  seed: number,
): string[] {
  const byStratum = new Map<string, string[]>();
  for (const t of tasks) {
    const list = byStratum.get(t.stratum) ?? [];
    list.push(t.task_id);
    byStratum.set(t.stratum, list);
  }
  const out: string[] = [];
  for (const stratum of [...byStratum.keys()].sort()) {
    out.push(...seededShuffle(byStratum.get(stratum)!, seed));
  }
  return out;
}
