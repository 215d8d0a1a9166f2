import { ApiClient } from "./api.js";
import type { ViewContext } from "./context.js";
import { clear, el } from "./dom.js";
import { navFor } from "./nav.js";
import { ConsoleState } from "./state.js";
import { renderAdmin } from "./views/admin.js";
import { renderCustomer } from "./views/customer.js";
import { renderDriver } from "./views/driver.js";
import { renderLogin } from "./views/login.js";
import { renderProvider } from "./views/provider.js";

const api = new ApiClient();
const state = new ConsoleState();

function renderShell(root: HTMLElement): void {
  const session = state.session;
  if (session === null) {
    renderLogin(root, {
      api,
      onSignedIn: (opened) => {
        state.openSession(opened);
        renderShell(root);
      },
    });
    return;
  }

  clear(root);
  const content = el("main", { class: "content" });
  const ctx: ViewContext = {
    api,
    state,
    rerender: () => renderContent(content, ctx),
    signOut: () => {
      api.logout();
      state.closeSession();
      renderShell(root);
    },
  };

  const navButtons = navFor(session.role).map((item) =>
    el("button", {
      type: "button",
      class: state.activeView === item.id ? "nav active" : "nav",
      "data-view": item.id,
      onclick: () => {
        if (state.setView(item.id)) renderShell(root);
      },
    }, [item.label]));

  root.append(
    el("header", { class: "topbar" }, [
      el("strong", {}, ["Fleetline"]),
      el("span", { class: "muted" }, [` ${session.login} (${session.role}) `]),
      el("nav", {}, navButtons),
      el("button", { type: "button", class: "secondary", onclick: () => ctx.signOut() },
        ["Sign out"]),
    ]),
    content,
  );
  renderContent(content, ctx);
}

function renderContent(content: HTMLElement, ctx: ViewContext): void {
  const session = state.session;
  if (session === null) return;
  switch (session.role) {
    case "Admin":
      renderAdmin(content, ctx);
      break;
    case "Provider":
      renderProvider(content, ctx);
      break;
    case "Customer":
      renderCustomer(content, ctx);
      break;
    case "Driver":
      renderDriver(content, ctx);
      break;
  }
}

const mount = document.getElementById("app");
if (mount !== null) {
  renderShell(mount);
}
