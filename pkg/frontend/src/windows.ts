/** Info pop-up windows: right-click toggles, drag repositions. */

export class WindowManager {
  readonly positions = new Map<string, [number, number]>();

  key(kind: "target" | "collective", subject: number): string {
    return `${kind}:${subject}`;
  }

  /** Returns true when the window is now open. */
  toggle(kind: "target" | "collective", subject: number,
         at: [number, number]): boolean {
    const key = this.key(kind, subject);
    if (this.positions.has(key)) {
      this.positions.delete(key);
      return false;
    }
    this.positions.set(key, at);
    return true;
  }

  drag(kind: "target" | "collective", subject: number,
       to: [number, number]): void {
    const key = this.key(kind, subject);
    if (this.positions.has(key)) this.positions.set(key, to);
  }

  isOpen(kind: "target" | "collective", subject: number): boolean {
    return this.positions.has(this.key(kind, subject));
  }

  openKeys(): string[] {
    return [...this.positions.keys()];
  }
}
