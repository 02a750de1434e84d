/**
 * Strict reader for the bench metrics CSV contract:
 *   method,correct,over,under,model_error,mean_nonzero,replicates
 *
 * Validation failures throw CsvValidationError with a message naming the
 * offending column(s); nothing here depends on how the table was produced.
 */

export const REQUIRED_COLUMNS = [
  'method',
  'correct',
  'over',
  'under',
  'model_error',
  'mean_nonzero',
  'replicates',
] as const;

export interface MethodRow {
  method: string;
  correct: number;
  over: number;
  under: number;
  modelError: number;
  meanNonzero: number;
  replicates: number;
}

export class CsvValidationError extends Error {}

function parseNumber(token: string, column: string, line: number): number {
  const value = Number(token);
  if (token.trim() === '' || !Number.isFinite(value)) {
    throw new CsvValidationError(
      `line ${line}: column '${column}' must be a finite number, got '${token}'`,
    );
  }
  return value;
}

export function parseMetricsCsv(text: string): MethodRow[] {
  const lines = text.split(/\r?\n/).filter((ln) => ln.trim() !== '');
  if (lines.length === 0) {
    throw new CsvValidationError('empty file: expected a metrics CSV header');
  }
  const header = lines[0].split(',').map((c) => c.trim());
  const missing = REQUIRED_COLUMNS.filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new CsvValidationError(
      `missing required column(s): ${missing.join(', ')}`,
    );
  }
  const extra = header.filter(
    (c) => !(REQUIRED_COLUMNS as readonly string[]).includes(c),
  );
  if (extra.length > 0) {
    throw new CsvValidationError(`unexpected column(s): ${extra.join(', ')}`);
  }
  const index = new Map(header.map((c, i) => [c, i]));
  const rows: MethodRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(',');
    if (parts.length !== header.length) {
      throw new CsvValidationError(
        `line ${i + 1}: expected ${header.length} fields, got ${parts.length}`,
      );
    }
    const field = (column: string): string => parts[index.get(column)!];
    rows.push({
      method: field('method'),
      correct: parseNumber(field('correct'), 'correct', i + 1),
      over: parseNumber(field('over'), 'over', i + 1),
      under: parseNumber(field('under'), 'under', i + 1),
      modelError: parseNumber(field('model_error'), 'model_error', i + 1),
      meanNonzero: parseNumber(field('mean_nonzero'), 'mean_nonzero', i + 1),
      replicates: parseNumber(field('replicates'), 'replicates', i + 1),
    });
  }
  if (rows.length === 0) {
    throw new CsvValidationError('no data rows after the header');
  }
  return rows;
}
