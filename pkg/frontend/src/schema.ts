/**
 * Frozen CSV schema of the experiment runner:
 *
 *   experiment,model,n,p,M,seed,stat,estimate,std_error,bound,quotient
 *
 * Numeric cells may be empty (inapplicable); nothing is ever quoted, so a
 * well-formed file splits on commas.
 */

import { z } from "zod";

export const CSV_HEADER = [
  "experiment",
  "model",
  "n",
  "p",
  "M",
  "seed",
  "stat",
  "estimate",
  "std_error",
  "bound",
  "quotient",
] as const;

export class SchemaError extends Error {
  readonly code = "schema-error";
}

export class EmptySelectionError extends Error {
  readonly code = "empty-error";
}

const optionalNumber = z
  .string()
  .transform((raw, ctx) => {
    if (raw === "") return null;
    const value = Number(raw);
    if (!Number.isFinite(value)) {
      ctx.addIssue({ code: z.ZodIssueCode.custom, message: `not a number: ${raw}` });
      return z.NEVER;
    }
    return value;
  });

const rowSchema = z.object({
  experiment: z.string(),
  model: z.string(),
  n: optionalNumber,
  p: optionalNumber,
  M: optionalNumber,
  seed: optionalNumber,
  stat: z.string(),
  estimate: optionalNumber,
  std_error: optionalNumber,
  bound: optionalNumber,
  quotient: optionalNumber,
});

export type CsvRow = z.infer<typeof rowSchema>;

export function validateHeader(cells: readonly string[]): void {
  if (cells.length !== CSV_HEADER.length || CSV_HEADER.some((c, i) => cells[i] !== c)) {
    throw new SchemaError(
      `bad header: expected "${CSV_HEADER.join(",")}", got "${cells.join(",")}"`,
    );
  }
}

export function parseRow(cells: readonly string[], line: number): CsvRow {
  if (cells.length !== CSV_HEADER.length) {
    throw new SchemaError(`line ${line}: expected ${CSV_HEADER.length} cells, got ${cells.length}`);
  }
  const record: Record<string, string> = {};
  CSV_HEADER.forEach((name, i) => {
    record[name] = cells[i]!;
  });
  const parsed = rowSchema.safeParse(record);
  if (!parsed.success) {
    const issue = parsed.error.issues[0];
    throw new SchemaError(`line ${line}: ${issue?.path.join(".")}: ${issue?.message}`);
  }
  return parsed.data;
}
