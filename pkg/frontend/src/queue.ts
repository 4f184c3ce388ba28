// Review queue helpers kept free of DOM so they are easy to test.

import { ModelListEntry } from "./xml.js";

export interface QueuePartition {
  actionable: ModelListEntry[];
  own: ModelListEntry[];
}

/**
 * Split pending models into ones the signed-in reviewer may act on and ones
 * they own or edit. Owned entries stay visible but carry no review controls;
 * the server refuses such verdicts anyway, this just keeps the UI honest.
 */
export function partitionQueue(
  entries: ModelListEntry[],
  username: string,
): QueuePartition {
  const actionable: ModelListEntry[] = [];
  const own: ModelListEntry[] = [];
  for (const entry of entries) {
    if (entry.status !== "pending") {
      continue;
    }
    const involved =
      entry.owners.includes(username) || entry.editors.includes(username);
    (involved ? own : actionable).push(entry);
  }
  return { actionable, own };
}

export function validateReviewText(text: string): string | null {
  if (text.trim().length === 0) {
    return "Review text must not be empty.";
  }
  return null;
}
