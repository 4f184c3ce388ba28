// Typed client for the gallery REST API. Every call either returns parsed
// data or throws ApiError carrying the server's error code.

import {
  FileEntry,
  ModelDoc,
  ModelListEntry,
  NotificationEntry,
  SessionInfo,
  parseError,
  parseFileEntry,
  parseModel,
  parseModelList,
  parseNotificationText,
  parseNotifications,
  parseSession,
  serializeModel,
} from "./xml.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export type Verdict = "approve" | "send_back" | "reject";

export class GalleryClient {
  // base is "" in the browser; tests point it at a spawned server and pass
  // the session cookie explicitly since there is no browser jar there
  constructor(
    private readonly base = "",
    private readonly headers: Record<string, string> = {},
  ) {}

  private async request(method: string, path: string, init: RequestInit = {}): Promise<Response> {
    const response = await fetch(this.base + path, {
      method,
      credentials: "same-origin",
      ...init,
      headers: { ...this.headers, ...(init.headers as Record<string, string> | undefined) },
    });
    if (!response.ok) {
      const body = await response.text();
      const parsed = parseError(body);
      throw new ApiError(
        response.status,
        parsed?.code ?? "UNEXPECTED",
        parsed?.message ?? `server answered ${response.status}`,
      );
    }
    return response;
  }

  private async requestText(method: string, path: string, init: RequestInit = {}): Promise<string> {
    return (await this.request(method, path, init)).text();
  }

  async login(user: string, pass: string): Promise<{ session: SessionInfo; setCookie: string | null }> {
    const body = new URLSearchParams({ user, pass }).toString();
    const response = await this.request("POST", "/api/login", {
      body,
      headers: { "content-type": "application/x-www-form-urlencoded" },
    });
    return {
      session: parseSession(await response.text()),
      setCookie: response.headers.get("set-cookie"),
    };
  }

  async logout(): Promise<void> {
    await this.request("POST", "/api/logout");
  }

  async listModels(): Promise<ModelListEntry[]> {
    return parseModelList(await this.requestText("GET", "/api/models"));
  }

  async createModel(title: string): Promise<ModelDoc> {
    const body = serializeCreate(title);
    return parseModel(await this.requestText("POST", "/api/models", { body }));
  }

  async getModel(key: string): Promise<ModelDoc> {
    return parseModel(await this.requestText("GET", `/api/models/${encodeURIComponent(key)}`));
  }

  async getPublicModel(key: string): Promise<ModelDoc> {
    return parseModel(await this.requestText("GET", `/models/${encodeURIComponent(key)}`));
  }

  async getVersion(key: string, version: number): Promise<ModelDoc> {
    return parseModel(
      await this.requestText("GET", `/models/${encodeURIComponent(key)}/versions/${version}`),
    );
  }

  // doc.version must be the version this edit was based on; 409 means stale
  async putModel(doc: ModelDoc): Promise<ModelDoc> {
    const body = serializeModel(doc);
    return parseModel(
      await this.requestText("PUT", `/api/models/${encodeURIComponent(doc.key)}`, { body }),
    );
  }

  async deleteModel(key: string): Promise<void> {
    await this.request("DELETE", `/api/models/${encodeURIComponent(key)}`);
  }

  async submit(key: string): Promise<void> {
    await this.request("POST", `/api/models/${encodeURIComponent(key)}/submit`);
  }

  async review(key: string, verdict: Verdict, reviewText: string): Promise<void> {
    const out = document.implementation.createDocument(null, "review");
    out.documentElement.setAttribute("verdict", verdict);
    const text = out.createElement("review-text");
    text.textContent = reviewText;
    out.documentElement.appendChild(text);
    await this.request("POST", `/api/models/${encodeURIComponent(key)}/review`, {
      body: new XMLSerializer().serializeToString(out),
    });
  }

  async reopen(key: string): Promise<ModelDoc> {
    return parseModel(
      await this.requestText("POST", `/api/models/${encodeURIComponent(key)}/reopen`),
    );
  }

  async grant(key: string, user: string, role: "owner" | "editor"): Promise<void> {
    const out = document.implementation.createDocument(null, "grant");
    out.documentElement.setAttribute("user", user);
    out.documentElement.setAttribute("role", role);
    await this.request("POST", `/api/models/${encodeURIComponent(key)}/permissions`, {
      body: new XMLSerializer().serializeToString(out),
    });
  }

  async uploadFile(
    key: string,
    data: Blob | ArrayBuffer,
    filename: string,
    mediaType: string,
  ): Promise<FileEntry> {
    const path = `/api/models/${encodeURIComponent(key)}/media?filename=${encodeURIComponent(filename)}`;
    return parseFileEntry(
      await this.requestText("POST", path, {
        body: data,
        headers: { "content-type": mediaType || "application/octet-stream" },
      }),
    );
  }

  async notifications(): Promise<NotificationEntry[]> {
    return parseNotifications(await this.requestText("GET", "/api/notifications"));
  }

  async markRead(id: number): Promise<NotificationEntry> {
    return parseNotificationText(await this.requestText("POST", `/api/notifications/${id}/read`));
  }
}

function serializeCreate(title: string): string {
  const out = document.implementation.createDocument(null, "create-model");
  out.documentElement.setAttribute("title", title);
  return new XMLSerializer().serializeToString(out);
}

export function fileUrl(blob: string): string {
  return `/api/files/${blob}`;
}
