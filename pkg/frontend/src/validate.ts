// Mirrors the service's coordinate bounds so an obviously bad form value
// surfaces inline instead of round-tripping just to collect a 422.

export function locationProblem(lat: number, lon: number): string | null {
  if (!Number.isFinite(lat) || lat < -90 || lat > 90) {
    return "invalid location: latitude must be within [-90, 90]";
  }
  if (!Number.isFinite(lon) || lon < -180 || lon > 180) {
    return "invalid location: longitude must be within [-180, 180]";
  }
  return null;
}
