// Display-only helpers. API figures render verbatim with a unit suffix;
// nothing here does arithmetic on service values.

export function fmtKm(value: string | number | null | undefined): string {
  return value === null || value === undefined ? "n/a" : `${value} km`;
}

export function fmtMoney(value: string | null | undefined): string {
  return value === null || value === undefined ? "n/a" : value;
}

export function fmtStars(value: number | null): string {
  return value === null ? "unrated" : value.toFixed(2);
}

export function fmtScore(value: number): string {
  return value.toFixed(4);
}

export function fmtWhen(ms: number): string {
  return new Date(ms).toISOString().replace("T", " ").slice(0, 19);
}
