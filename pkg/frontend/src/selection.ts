// Vertex region painting with an exact-inverse undo/redo stack.

interface PaintDelta {
  added: number[];
  removed: number[];
}

export class RegionPaintSet {
  private selected = new Set<number>();
  private undoStack: PaintDelta[] = [];
  private redoStack: PaintDelta[] = [];

  constructor(readonly vertexCount: number) {}

  get size(): number {
    return this.selected.size;
  }

  has(index: number): boolean {
    return this.selected.has(index);
  }

  indices(): number[] {
    return [...this.selected].sort((a, b) => a - b);
  }

  /** Add vertices (one brush stroke); returns how many were newly selected. */
  paint(indices: Iterable<number>): number {
    const added: number[] = [];
    for (const i of indices) {
      if (!Number.isInteger(i) || i < 0 || i >= this.vertexCount) {
        throw new Error(`vertex index ${i} out of range`);
      }
      if (!this.selected.has(i)) {
        this.selected.add(i);
        added.push(i);
      }
    }
    if (added.length > 0) {
      this.undoStack.push({ added, removed: [] });
      this.redoStack.length = 0;
    }
    return added.length;
  }

  /** Remove vertices (eraser stroke). */
  erase(indices: Iterable<number>): number {
    const removed: number[] = [];
    for (const i of indices) {
      if (this.selected.delete(i)) {
        removed.push(i);
      }
    }
    if (removed.length > 0) {
      this.undoStack.push({ added: [], removed });
      this.redoStack.length = 0;
    }
    return removed.length;
  }

  clear(): void {
    if (this.selected.size === 0) return;
    this.undoStack.push({ added: [], removed: [...this.selected] });
    this.redoStack.length = 0;
    this.selected.clear();
  }

  get canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  get canRedo(): boolean {
    return this.redoStack.length > 0;
  }

  undo(): boolean {
    const delta = this.undoStack.pop();
    if (!delta) return false;
    for (const i of delta.added) this.selected.delete(i);
    for (const i of delta.removed) this.selected.add(i);
    this.redoStack.push(delta);
    return true;
  }

  redo(): boolean {
    const delta = this.redoStack.pop();
    if (!delta) return false;
    for (const i of delta.added) this.selected.add(i);
    for (const i of delta.removed) this.selected.delete(i);
    this.undoStack.push(delta);
    return true;
  }

  /** Non-empty region payload for the edit endpoint; rejects empty paint. */
  toRegion(): number[] {
    if (this.selected.size === 0) {
      throw new Error("empty selection: paint a region before submitting");
    }
    return this.indices();
  }
}
