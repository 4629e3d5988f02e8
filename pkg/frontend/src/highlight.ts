import type { Task } from "./types.js";

export interface Span {
  start: number;
  end: number;
  kind: "gene" | "phenotype";
}

export interface Segment {
  text: string;
  kinds: ("gene" | "phenotype")[];
}

/** Spans must lie inside the sentence; anything else means the task's
 * offsets are corrupt and the task should be skipped, not rendered. */
export function spansValid(task: Task): boolean {
  const inRange = (start: number, end: number) =>
    Number.isInteger(start) && Number.isInteger(end) &&
    start >= 0 && start < end && end <= task.sentence.length;
  return (
    inRange(task.gene_start, task.gene_end) &&
    inRange(task.phenotype_start, task.phenotype_end)
  );
}

/** Cut the sentence at every span boundary. Each segment carries the set of
 * entity kinds covering it, so nested or crossing gene/phenotype spans
 * render without broken markup. */
export function segmentSentence(sentence: string, spans: Span[]): Segment[] {
  const cuts = new Set<number>([0, sentence.length]);
  for (const span of spans) {
    cuts.add(span.start);
    cuts.add(span.end);
  }
  const points = [...cuts].sort((a, b) => a - b);
  const segments: Segment[] = [];
  for (let i = 0; i + 1 < points.length; i++) {
    const [start, end] = [points[i], points[i + 1]];
    if (start === end) continue;
    const kinds = spans
      .filter((s) => s.start <= start && end <= s.end)
      .map((s) => s.kind);
    segments.push({ text: sentence.slice(start, end), kinds });
  }
  return segments;
}

/** Render the sentence with the gene and phenotype visually highlighted.
 * Uses DOM nodes, never innerHTML: sentence text is untrusted. */
export function buildSentenceElement(doc: Document, task: Task): HTMLElement {
  const container = doc.createElement("p");
  container.className = "sentence";
  const spans: Span[] = [
    { start: task.gene_start, end: task.gene_end, kind: "gene" },
    { start: task.phenotype_start, end: task.phenotype_end, kind: "phenotype" },
  ];
  for (const segment of segmentSentence(task.sentence, spans)) {
    if (segment.kinds.length === 0) {
      container.appendChild(doc.createTextNode(segment.text));
      continue;
    }
    const mark = doc.createElement("mark");
    mark.className = segment.kinds.map((k) => `highlight-${k}`).join(" ");
    mark.textContent = segment.text;
    container.appendChild(mark);
  }
  return container;
}
