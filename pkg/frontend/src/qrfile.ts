// Browser-side QR image decoding: file bytes -> canvas -> jsQR.
// Kept behind the ImageDecoder interface so tests can substitute it.

import jsQR from 'jsqr';
import type { ImageDecoder } from './views/verifier.js';

export const canvasImageDecoder: ImageDecoder = (bytes, mimeType) =>
  new Promise((resolve) => {
    const blob = new Blob([bytes.buffer as ArrayBuffer], { type: mimeType });
    const url = URL.createObjectURL(blob);
    const img = new Image();
    img.onload = () => {
      const canvas = document.createElement('canvas');
      canvas.width = img.width;
      canvas.height = img.height;
      const ctx = canvas.getContext('2d');
      if (!ctx) {
        URL.revokeObjectURL(url);
        resolve(null);
        return;
      }
      ctx.drawImage(img, 0, 0);
      const data = ctx.getImageData(0, 0, canvas.width, canvas.height);
      URL.revokeObjectURL(url);
      const result = jsQR(data.data, data.width, data.height);
      resolve(result ? result.data : null);
    };
    img.onerror = () => {
      URL.revokeObjectURL(url);
      resolve(null);
    };
    img.src = url;
  });
