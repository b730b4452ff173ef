// On-screen QWERTY keyboard with pixel hit-testing.  There is deliberately
// no Backspace key; Shift is one-shot (applies to the next letter).

export interface KeyRect {
  label: string;
  value: string; // resolved key: a character, "Enter" or "Shift"
  x: number;
  y: number;
  w: number;
  h: number;
}

const ROWS: string[][] = [
  ["q", "w", "e", "r", "t", "y", "u", "i", "o", "p"],
  ["a", "s", "d", "f", "g", "h", "j", "k", "l"],
  ["Shift", "z", "x", "c", "v", "b", "n", "m", ".", ","],
  ["Space", "Enter"],
];

export class VirtualKeyboard {
  shift = false;

  constructor(
    private readonly x: number,
    private readonly y: number,
    private readonly width: number,
    private readonly rowHeight: number,
  ) {}

  keys(): KeyRect[] {
    const out: KeyRect[] = [];
    ROWS.forEach((row, r) => {
      const weights = row.map((k) => (k === "Space" ? 6 : k === "Enter" || k === "Shift" ? 2 : 1));
      const total = weights.reduce((a, b) => a + b, 0);
      let cx = this.x;
      row.forEach((key, i) => {
        const w = (this.width * weights[i]) / total;
        let label = key;
        if (key.length === 1 && key >= "a" && key <= "z") {
          label = this.shift ? key.toUpperCase() : key;
        }
        out.push({
          label,
          value: key,
          x: cx,
          y: this.y + r * this.rowHeight,
          w,
          h: this.rowHeight,
        });
        cx += w;
      });
    });
    return out;
  }

  /** Resolve a pointer press to a key value, handling Shift and Space. */
  press(px: number, py: number): string | null {
    const key = this.keys().find(
      (k) => px >= k.x && px < k.x + k.w && py >= k.y && py < k.y + k.h,
    );
    if (!key) {
      return null;
    }
    if (key.value === "Shift") {
      this.shift = !this.shift;
      return "Shift";
    }
    if (key.value === "Space") {
      return " ";
    }
    if (key.value === "Enter") {
      return "Enter";
    }
    let ch = key.value;
    if (this.shift && ch >= "a" && ch <= "z") {
      ch = ch.toUpperCase();
      this.shift = false;
    }
    return ch;
  }

  hasKey(value: string): boolean {
    return this.keys().some((k) => k.value === value);
  }
}
