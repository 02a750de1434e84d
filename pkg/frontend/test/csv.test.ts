import { describe, expect, it } from 'vitest';

import { CsvValidationError, parseMetricsCsv } from '../src/csv';

const HEADER = 'method,correct,over,under,model_error,mean_nonzero,replicates';
const GOOD = [
  HEADER,
  'scad-1step[lambda=0.3],0.83,0.17,0,0.0644,3.17,100',
  'posterior-median[pi=0.9;tau=1],0.98,0.02,0,0.0658,3.02,100',
].join('\n');

describe('parseMetricsCsv', () => {
  it('parses a conforming table', () => {
    const rows = parseMetricsCsv(GOOD);
    expect(rows).toHaveLength(2);
    expect(rows[0].method).toBe('scad-1step[lambda=0.3]');
    expect(rows[0].correct).toBeCloseTo(0.83, 12);
    expect(rows[1].replicates).toBe(100);
  });

  it('names a deleted column', () => {
    const withoutOver = [
      'method,correct,under,model_error,mean_nonzero,replicates',
      'scad-1step,0.83,0,0.0644,3.17,100',
    ].join('\n');
    expect(() => parseMetricsCsv(withoutOver)).toThrowError(CsvValidationError);
    expect(() => parseMetricsCsv(withoutOver)).toThrowError(/over/);
  });

  it('names every missing column', () => {
    try {
      parseMetricsCsv('method,correct\nx,1');
      expect.unreachable();
    } catch (err) {
      const message = (err as Error).message;
      for (const col of ['over', 'under', 'model_error', 'mean_nonzero', 'replicates']) {
        expect(message).toContain(col);
      }
    }
  });

  it('rejects unexpected columns', () => {
    const extra = [
      HEADER + ',bonus',
      'scad-1step,0.83,0.17,0,0.0644,3.17,100,1',
    ].join('\n');
    expect(() => parseMetricsCsv(extra)).toThrowError(/bonus/);
  });

  it('rejects non-numeric fields and ragged rows', () => {
    expect(() =>
      parseMetricsCsv(`${HEADER}\nscad,not-a-number,0.17,0,0.06,3.1,100`),
    ).toThrowError(/correct/);
    expect(() => parseMetricsCsv(`${HEADER}\nscad,0.83,0.17`)).toThrowError(
      /fields/,
    );
  });

  it('rejects empty input and header-only input', () => {
    expect(() => parseMetricsCsv('')).toThrowError(CsvValidationError);
    expect(() => parseMetricsCsv(HEADER)).toThrowError(/no data rows/);
  });
});
