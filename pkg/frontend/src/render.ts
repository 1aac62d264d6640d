// Screenshot presentation. The canvas element is used instead of an <img>
// so frame swaps happen atomically with no flicker: the new bitmap is fully
// decoded before a single drawImage call repaints, and the canvas is only
// resized (which clears it) when the page dimensions actually change.

export interface FrameSink {
  resize(width: number, height: number): void;
  draw(png: Uint8Array): Promise<void>;
  readonly width: number;
  readonly height: number;
}

export class CanvasSink implements FrameSink {
  private context: CanvasRenderingContext2D;

  constructor(readonly canvas: HTMLCanvasElement) {
    const context = canvas.getContext('2d');
    if (!context) {
      throw new Error('canvas 2d context unavailable');
    }
    this.context = context;
  }

  get width(): number {
    return this.canvas.width;
  }

  get height(): number {
    return this.canvas.height;
  }

  resize(width: number, height: number): void {
    if (this.canvas.width !== width || this.canvas.height !== height) {
      this.canvas.width = width;
      this.canvas.height = height;
      this.canvas.style.width = `${width}px`;
      this.canvas.style.height = `${height}px`;
    }
  }

  async draw(png: Uint8Array): Promise<void> {
    const copy = new Uint8Array(png); // detach from the frame buffer
    const blob = new Blob([copy.buffer as ArrayBuffer], { type: 'image/png' });
    if (typeof createImageBitmap === 'function') {
      const bitmap = await createImageBitmap(blob);
      this.context.drawImage(bitmap, 0, 0);
      bitmap.close?.();
      return;
    }
    // older engines: decode through an Image element
    const url = URL.createObjectURL(blob);
    try {
      await new Promise<void>((resolve, reject) => {
        const image = new Image();
        image.onload = () => {
          this.context.drawImage(image, 0, 0);
          resolve();
        };
        image.onerror = () => reject(new Error('screenshot decode failed'));
        image.src = url;
      });
    } finally {
      URL.revokeObjectURL(url);
    }
  }
}

/** Test double: records calls instead of painting. */
export class RecordingSink implements FrameSink {
  width = 0;
  height = 0;
  resizes: Array<[number, number]> = [];
  drawn: Uint8Array[] = [];

  resize(width: number, height: number): void {
    if (this.width !== width || this.height !== height) {
      this.resizes.push([width, height]);
      this.width = width;
      this.height = height;
    }
  }

  async draw(png: Uint8Array): Promise<void> {
    this.drawn.push(png);
  }
}
