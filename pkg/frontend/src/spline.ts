/**
 * Client-side cubic B-spline colormap sampling.
 *
 * Mirrors the server's math so the colormap strip can redraw at 60 fps
 * while dragging, without a round trip. Contract-tested against server
 * fixtures to 1e-6 per channel.
 */

export type Rgb = [number, number, number];

const DEGREE = 3;

export function clampedUniformKnots(nPoints: number): number[] {
  if (nPoints < 4) {
    throw new Error(`a cubic spline needs at least 4 control points, got ${nPoints}`);
  }
  const knots: number[] = [0, 0, 0, 0];
  for (let k = 1; k < nPoints - 3; k++) {
    knots.push(k / (nPoints - 3));
  }
  knots.push(1, 1, 1, 1);
  return knots;
}

function findSpan(knots: number[], t: number): number {
  const nBasis = knots.length - DEGREE - 1;
  let lo = DEGREE;
  let hi = nBasis - 1;
  if (t >= knots[nBasis]) return hi;
  if (t <= knots[DEGREE]) return lo;
  // binary search for the knot span containing t
  while (lo < hi) {
    const mid = (lo + hi + 1) >> 1;
    if (knots[mid] <= t) lo = mid;
    else hi = mid - 1;
  }
  return lo;
}

/** The n basis values N_{i,3}(t) as a dense row (partition of unity). */
export function basisRow(knots: number[], t: number): number[] {
  const nBasis = knots.length - DEGREE - 1;
  const row = new Array<number>(nBasis).fill(0);
  const clamped = Math.min(Math.max(t, knots[0]), knots[knots.length - 1]);
  if (clamped === knots[0]) {
    row[0] = 1;
    return row;
  }
  if (clamped === knots[knots.length - 1]) {
    row[nBasis - 1] = 1;
    return row;
  }
  const span = findSpan(knots, clamped);
  const values = [1, 0, 0, 0];
  const left = [0, 0, 0, 0];
  const right = [0, 0, 0, 0];
  for (let j = 1; j <= DEGREE; j++) {
    left[j] = clamped - knots[span + 1 - j];
    right[j] = knots[span + j] - clamped;
    let saved = 0;
    for (let r = 0; r < j; r++) {
      const denom = right[r + 1] + left[j - r];
      const temp = denom > 0 ? values[r] / denom : 0;
      values[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    values[j] = saved;
  }
  for (let k = 0; k <= DEGREE; k++) {
    row[span - DEGREE + k] = values[k];
  }
  return row;
}

export function evalColormap(controlPoints: number[][], knots: number[], t: number): Rgb {
  const row = basisRow(knots, t);
  const out: Rgb = [0, 0, 0];
  for (let i = 0; i < controlPoints.length; i++) {
    const w = row[i];
    if (w === 0) continue;
    out[0] += w * controlPoints[i][0];
    out[1] += w * controlPoints[i][1];
    out[2] += w * controlPoints[i][2];
  }
  return out;
}

/** Uniform inclusive samples t_k = k/(size-1), matching the server grid. */
export function sampleColormap(
  controlPoints: number[][],
  knots: number[] | undefined,
  size: number,
): Rgb[] {
  if (size < 2) throw new Error(`need at least 2 samples, got ${size}`);
  const kn = knots ?? clampedUniformKnots(controlPoints.length);
  const samples: Rgb[] = [];
  for (let k = 0; k < size; k++) {
    samples.push(evalColormap(controlPoints, kn, k / (size - 1)));
  }
  return samples;
}

export function clampChannel(v: number): number {
  return Math.min(1, Math.max(0, v));
}

export function rgbCss([r, g, b]: Rgb): string {
  const to255 = (v: number) => Math.round(clampChannel(v) * 255);
  return `rgb(${to255(r)}, ${to255(g)}, ${to255(b)})`;
}
