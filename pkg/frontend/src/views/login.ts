import { ApiClient, ApiError } from "../api.js";
import { clear, el, textInput } from "../dom.js";
import type { Session } from "../state.js";

export interface LoginDeps {
  api: ApiClient;
  onSignedIn(session: Session): void;
}

/** Sign-in plus self-registration for customers and providers. */
export function renderLogin(root: HTMLElement, deps: LoginDeps): void {
  clear(root);
  const status = el("p", { class: "status", "data-role": "login-status" });

  const loginField = textInput("login", "login");
  const passwordField = el("input", { name: "password", placeholder: "password", type: "password" });

  async function signIn(): Promise<void> {
    status.textContent = "";
    try {
      const info = await deps.api.login(loginField.value.trim(), passwordField.value);
      deps.onSignedIn({
        accountId: info.accountId,
        role: info.role,
        login: loginField.value.trim(),
      });
    } catch (err) {
      status.textContent = err instanceof ApiError
        ? `${err.code}: ${err.message}`
        : "sign-in failed";
    }
  }

  const nameField = textInput("name", "display name");
  const kindSelect = el("select", { name: "kind" }, [
    el("option", { value: "customer" }, ["Customer"]),
    el("option", { value: "provider" }, ["Provider"]),
  ]);

  async function register(): Promise<void> {
    status.textContent = "";
    const body = {
      login: loginField.value.trim(),
      password: passwordField.value,
      name: nameField.value.trim(),
    };
    try {
      if (kindSelect.value === "provider") {
        await deps.api.registerProvider(body);
        status.textContent = "registered; a provider account needs admin approval before it can operate";
      } else {
        await deps.api.registerCustomer(body);
        status.textContent = "registered; sign in to continue";
      }
    } catch (err) {
      status.textContent = err instanceof ApiError
        ? `${err.code}: ${err.message}`
        : "registration failed";
    }
  }

  root.append(
    el("div", { class: "card login-card" }, [
      el("h1", {}, ["Fleetline console"]),
      el("div", { class: "field-row" }, [loginField, passwordField]),
      el("div", { class: "field-row" }, [
        el("button", { type: "button", onclick: () => void signIn() }, ["Sign in"]),
      ]),
      el("h2", {}, ["New account"]),
      el("div", { class: "field-row" }, [nameField, kindSelect]),
      el("div", { class: "field-row" }, [
        el("button", { type: "button", class: "secondary", onclick: () => void register() }, [
          "Register",
        ]),
      ]),
      status,
    ]),
  );
}
