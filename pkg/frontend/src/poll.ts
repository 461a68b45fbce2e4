import type { ApiClient } from "./api.js";
import { TERMINAL_JOB_STATES, type JobSnapshot } from "./types.js";

const inFlight = new Map<string, Promise<JobSnapshot>>();

/** Poll a crawl job until it reaches a terminal state, invoking onUpdate
 * with every snapshot. Concurrent polls for the same job id are coalesced
 * into one promise so repeated UI renders never stack requests. */
export function pollJob(
  api: ApiClient,
  jobId: string,
  onUpdate: (snapshot: JobSnapshot) => void,
  intervalMs = 2000,
): Promise<JobSnapshot> {
  const existing = inFlight.get(jobId);
  if (existing) {
    return existing;
  }
  const done = new Promise<JobSnapshot>((resolve, reject) => {
    const tick = async () => {
      let snapshot: JobSnapshot;
      try {
        snapshot = await api.getJob(jobId);
      } catch (err) {
        inFlight.delete(jobId);
        reject(err);
        return;
      }
      onUpdate(snapshot);
      if (TERMINAL_JOB_STATES.includes(snapshot.state)) {
        inFlight.delete(jobId);
        resolve(snapshot);
        return;
      }
      setTimeout(tick, intervalMs);
    };
    tick();
  });
  inFlight.set(jobId, done);
  return done;
}
