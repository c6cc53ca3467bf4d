/**
 * Continuous color scale shared by the sweep strip and the main tip path:
 * the latent coordinate maps onto a cool-to-warm sweep so neighboring
 * latent values stay visually adjacent.
 */
export function zColor(z: number, zMin: number, zMax: number): string {
  const t = zMax > zMin ? Math.min(1, Math.max(0, (z - zMin) / (zMax - zMin))) : 0.5;
  const hue = 230 - 210 * t; // blue (230) through green to orange-red (20)
  return `hsl(${hue.toFixed(1)}, 85%, 52%)`;
}

export function normalized(z: number, zMin: number, zMax: number): number {
  return zMax > zMin ? (z - zMin) / (zMax - zMin) : 0.5;
}
