import type { ApiClient } from "./api.js";
import type { ConsoleState } from "./state.js";

export interface ViewContext {
  api: ApiClient;
  state: ConsoleState;
  /** Re-render the active surface (after a view switch or data change). */
  rerender(): void;
  signOut(): void;
}
