/** Minimal CSV access for crossing-lab artifacts (plain comma-separated,
 * header row, no quoting in any emitted file). */

export class SchemaMismatchError extends Error {}

export interface Table {
  header: string[];
  rows: Record<string, string>[];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaMismatchError("empty CSV: no header row");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => {
    const cells = line.split(",");
    const row: Record<string, string> = {};
    header.forEach((name, i) => (row[name] = cells[i] ?? ""));
    return row;
  });
  return { header, rows };
}

export function requireColumns(table: Table, columns: string[], where: string): void {
  for (const col of columns) {
    if (!table.header.includes(col)) {
      throw new SchemaMismatchError(`${where}: missing column '${col}'`);
    }
  }
  if (table.rows.length === 0) {
    throw new SchemaMismatchError(`${where}: no data rows`);
  }
}

export function numbers(table: Table, column: string): number[] {
  return table.rows.map((r) => Number(r[column]));
}
