// Application shell: hash router, navigation bar, session handling, toasts.

import { ApiError, GalleryClient } from "./api.js";
import {
  ViewContext,
  describeError,
  editorView,
  galleryView,
  inboxView,
  loginView,
  modelView,
  queueView,
} from "./views.js";
import { SessionInfo } from "./xml.js";

const SESSION_KEY = "gallery-session";

function loadSession(): SessionInfo | null {
  const raw = window.sessionStorage.getItem(SESSION_KEY);
  if (raw === null) {
    return null;
  }
  try {
    return JSON.parse(raw) as SessionInfo;
  } catch {
    return null;
  }
}

type Route =
  | { name: "gallery" }
  | { name: "login" }
  | { name: "model"; key: string; version?: number }
  | { name: "editor"; key: string }
  | { name: "queue" }
  | { name: "inbox" };

export function parseRoute(hash: string): Route {
  const parts = hash.replace(/^#\/?/, "").split("/").filter((p) => p !== "");
  if (parts.length === 0) {
    return { name: "gallery" };
  }
  const [head, ...rest] = parts;
  switch (head) {
    case "login":
      return { name: "login" };
    case "queue":
      return { name: "queue" };
    case "inbox":
      return { name: "inbox" };
    case "model": {
      if (rest.length === 0) {
        return { name: "gallery" };
      }
      const key = decodeURIComponent(rest[0]);
      if (rest.length === 3 && rest[1] === "v" && /^\d+$/.test(rest[2])) {
        return { name: "model", key, version: Number(rest[2]) };
      }
      return { name: "model", key };
    }
    case "edit":
      return rest.length > 0
        ? { name: "editor", key: decodeURIComponent(rest[0]) }
        : { name: "gallery" };
    default:
      return { name: "gallery" };
  }
}

class App {
  private readonly client = new GalleryClient();
  private session: SessionInfo | null = loadSession();
  private readonly main: HTMLElement;
  private readonly navRight: HTMLElement;
  private readonly navLinks: HTMLElement;
  private readonly toasts: HTMLElement;
  private unread = 0;

  constructor(root: HTMLElement) {
    const header = document.createElement("header");
    header.className = "topbar";
    const brand = document.createElement("a");
    brand.className = "brand";
    brand.href = "#/";
    brand.textContent = "Model Gallery";
    this.navLinks = document.createElement("nav");
    this.navRight = document.createElement("div");
    this.navRight.className = "nav-session";
    header.append(brand, this.navLinks, this.navRight);

    this.main = document.createElement("main");
    this.toasts = document.createElement("div");
    this.toasts.className = "toasts";
    root.append(header, this.main, this.toasts);

    window.addEventListener("hashchange", () => void this.render());
  }

  private context(): ViewContext {
    return {
      client: this.client,
      session: this.session,
      navigate: (hash) => this.navigate(hash),
      setSession: (s) => this.setSession(s),
      toast: (message, kind) => this.toast(message, kind),
      refreshUnread: () => void this.refreshUnread(),
    };
  }

  navigate(hash: string): void {
    if (window.location.hash === hash) {
      void this.render();
    } else {
      window.location.hash = hash;
    }
  }

  setSession(session: SessionInfo | null): void {
    this.session = session;
    if (session === null) {
      window.sessionStorage.removeItem(SESSION_KEY);
    } else {
      window.sessionStorage.setItem(SESSION_KEY, JSON.stringify(session));
    }
    this.renderNav();
  }

  toast(message: string, kind: "ok" | "error" = "ok"): void {
    const node = document.createElement("div");
    node.className = kind === "error" ? "toast toast-error" : "toast";
    node.textContent = message;
    this.toasts.appendChild(node);
    window.setTimeout(() => node.remove(), 4000);
  }

  private renderNav(): void {
    this.navLinks.replaceChildren();
    const add = (label: string, hash: string) => {
      const a = document.createElement("a");
      a.href = hash;
      a.textContent = label;
      this.navLinks.appendChild(a);
    };
    add("Models", "#/");
    if (this.session && (this.session.role === "reviewer" || this.session.role === "admin")) {
      add("Queue", "#/queue");
    }
    if (this.session) {
      add(this.unread > 0 ? `Inbox (${this.unread})` : "Inbox", "#/inbox");
    }

    this.navRight.replaceChildren();
    if (this.session === null) {
      const login = document.createElement("a");
      login.href = "#/login";
      login.textContent = "Sign in";
      this.navRight.appendChild(login);
      return;
    }
    const who = document.createElement("span");
    who.className = "whoami";
    who.textContent = `${this.session.displayName} (${this.session.role})`;
    const out = document.createElement("button");
    out.type = "button";
    out.textContent = "Sign out";
    out.addEventListener("click", async () => {
      try {
        await this.client.logout();
      } catch {
        // the session may already be gone server-side; drop it locally anyway
      }
      this.setSession(null);
      this.toast("Signed out");
      this.navigate("#/");
    });
    this.navRight.append(who, out);
  }

  private async refreshUnread(): Promise<void> {
    if (this.session === null) {
      this.unread = 0;
      this.renderNav();
      return;
    }
    try {
      const entries = await this.client.notifications();
      this.unread = entries.filter((e) => !e.read).length;
    } catch {
      this.unread = 0;
    }
    this.renderNav();
  }

  async render(): Promise<void> {
    const route = parseRoute(window.location.hash);
    const ctx = this.context();
    this.main.replaceChildren();
    const loading = document.createElement("p");
    loading.className = "loading";
    loading.textContent = "Loading...";
    this.main.appendChild(loading);
    try {
      let view: HTMLElement;
      switch (route.name) {
        case "login":
          view = loginView(ctx);
          break;
        case "model":
          view = await modelView(ctx, route.key, route.version);
          break;
        case "editor":
          view = await editorView(ctx, route.key);
          break;
        case "queue":
          view = await queueView(ctx);
          break;
        case "inbox":
          view = await inboxView(ctx);
          break;
        default:
          view = await galleryView(ctx);
      }
      this.main.replaceChildren(view);
    } catch (err) {
      if (err instanceof ApiError && err.status === 401 && this.session !== null) {
        // stored session no longer valid on the server
        this.setSession(null);
        this.toast("Your session expired; sign in again.", "error");
        this.navigate("#/login");
        return;
      }
      const box = document.createElement("p");
      box.className = "form-error";
      box.textContent = describeError(err);
      this.main.replaceChildren(box);
    }
    void this.refreshUnread();
  }
}

const rootElement = document.getElementById("app");
if (rootElement) {
  const app = new App(rootElement);
  void app.render();
}
