// Parsing and serialization of the server's XML wire format.
// Documents are rebuilt through the DOM so escaping is never hand-rolled.

export interface AuthorRef {
  name: string;
  affiliation?: string;
}

export interface Reference {
  key: string;
  type: string;
  attrs: Record<string, string>;
}

export interface FileEntry {
  blob: string;
  name: string;
  type: string;
  size: number;
}

export interface MediaObjectDoc {
  id: string;
  title: string;
  text: string;
  files: FileEntry[];
  preview?: string;
}

export interface ModelDoc {
  key: string;
  version: number;
  status: string;
  editedBy: string;
  schema: number;
  title: string;
  authors: AuthorRef[];
  text: string;
  keywords: string[];
  references: Reference[];
  date?: string;
  media: MediaObjectDoc[];
  license?: string;
}

export interface ModelListEntry {
  key: string;
  version: number;
  status: string;
  title: string;
  owners: string[];
  editors: string[];
}

export interface SessionInfo {
  user: string;
  displayName: string;
  role: string;
}

export interface NotificationEntry {
  id: number;
  key: string;
  version: number;
  event: string;
  at: string;
  read: boolean;
  reviewText?: string;
}

export class WireError extends Error {}

function parseXml(text: string): Element {
  const doc = new DOMParser().parseFromString(text, "text/xml");
  const err = doc.querySelector("parsererror");
  if (err || !doc.documentElement) {
    throw new WireError("unparseable server response");
  }
  return doc.documentElement;
}

function attr(el: Element, name: string): string {
  const value = el.getAttribute(name);
  if (value === null) {
    throw new WireError(`<${el.tagName}> is missing @${name}`);
  }
  return value;
}

function intAttr(el: Element, name: string): number {
  const n = Number(attr(el, name));
  if (!Number.isInteger(n)) {
    throw new WireError(`<${el.tagName}> @${name} is not an integer`);
  }
  return n;
}

function childText(el: Element, tag: string): string {
  for (const child of Array.from(el.children)) {
    if (child.tagName === tag) {
      return child.textContent ?? "";
    }
  }
  return "";
}

function child(el: Element, tag: string): Element | null {
  for (const c of Array.from(el.children)) {
    if (c.tagName === tag) {
      return c;
    }
  }
  return null;
}

export function parseModel(text: string): ModelDoc {
  const root = parseXml(text);
  if (root.tagName !== "model") {
    throw new WireError(`expected <model>, got <${root.tagName}>`);
  }
  const description = child(root, "description");
  if (!description) {
    throw new WireError("<model> has no <description>");
  }

  const authors: AuthorRef[] = [];
  for (const a of Array.from(child(description, "authors")?.children ?? [])) {
    const entry: AuthorRef = { name: a.textContent ?? "" };
    const affiliation = a.getAttribute("affiliation");
    if (affiliation !== null) {
      entry.affiliation = affiliation;
    }
    authors.push(entry);
  }

  const keywords = Array.from(child(description, "keywords")?.children ?? []).map(
    (k) => k.textContent ?? "",
  );

  const references: Reference[] = [];
  for (const r of Array.from(child(description, "references")?.children ?? [])) {
    const attrs: Record<string, string> = {};
    for (const a of Array.from(r.children)) {
      attrs[attr(a, "name")] = a.textContent ?? "";
    }
    references.push({ key: attr(r, "key"), type: attr(r, "type"), attrs });
  }

  const media: MediaObjectDoc[] = [];
  for (const m of Array.from(child(root, "media-objects")?.children ?? [])) {
    const files: FileEntry[] = [];
    let preview: string | undefined;
    for (const c of Array.from(m.children)) {
      if (c.tagName === "file") {
        files.push({
          blob: attr(c, "blob"),
          name: attr(c, "name"),
          type: attr(c, "type"),
          size: intAttr(c, "size"),
        });
      } else if (c.tagName === "preview") {
        preview = attr(c, "blob");
      }
    }
    media.push({
      id: attr(m, "id"),
      title: childText(m, "title"),
      text: childText(m, "text"),
      files,
      ...(preview === undefined ? {} : { preview }),
    });
  }

  const licenseEl = child(root, "license");
  const dateText = childText(description, "date");
  return {
    key: attr(root, "key"),
    version: intAttr(root, "version"),
    status: attr(root, "status"),
    editedBy: attr(root, "edited-by"),
    schema: intAttr(root, "schema"),
    title: childText(description, "title"),
    authors,
    text: childText(description, "text"),
    keywords,
    references,
    ...(dateText ? { date: dateText } : {}),
    media,
    ...(licenseEl ? { license: licenseEl.textContent ?? "" } : {}),
  };
}

// The document sent back on save. The version attribute carries the version
// the edit was based on; the server answers 409 if someone saved in between.
export function serializeModel(doc: ModelDoc): string {
  const out = document.implementation.createDocument(null, "model");
  const root = out.documentElement;
  const el = (parent: Element, tag: string): Element => {
    const e = out.createElement(tag);
    parent.appendChild(e);
    return e;
  };

  root.setAttribute("key", doc.key);
  root.setAttribute("version", String(doc.version));
  root.setAttribute("status", doc.status);
  root.setAttribute("edited-by", doc.editedBy);
  root.setAttribute("schema", String(doc.schema));

  const description = el(root, "description");
  el(description, "title").textContent = doc.title;
  const authors = el(description, "authors");
  doc.authors.forEach((a, i) => {
    const ae = el(authors, "author");
    ae.setAttribute("position", String(i));
    if (a.affiliation !== undefined) {
      ae.setAttribute("affiliation", a.affiliation);
    }
    ae.textContent = a.name;
  });
  el(description, "text").textContent = doc.text;
  const keywords = el(description, "keywords");
  for (const k of doc.keywords) {
    el(keywords, "keyword").textContent = k;
  }
  const references = el(description, "references");
  for (const r of doc.references) {
    const re = el(references, "reference");
    re.setAttribute("key", r.key);
    re.setAttribute("type", r.type);
    for (const [name, value] of Object.entries(r.attrs)) {
      const ae = el(re, "attr");
      ae.setAttribute("name", name);
      ae.textContent = value;
    }
  }
  if (doc.date) {
    el(description, "date").textContent = doc.date;
  }

  const mediaObjects = el(root, "media-objects");
  for (const m of doc.media) {
    const me = el(mediaObjects, "media-object");
    me.setAttribute("id", m.id);
    el(me, "title").textContent = m.title;
    el(me, "text").textContent = m.text;
    for (const f of m.files) {
      const fe = el(me, "file");
      fe.setAttribute("blob", f.blob);
      fe.setAttribute("name", f.name);
      fe.setAttribute("type", f.type);
      fe.setAttribute("size", String(f.size));
    }
    if (m.preview !== undefined) {
      el(me, "preview").setAttribute("blob", m.preview);
    }
  }

  if (doc.license !== undefined) {
    el(root, "license").textContent = doc.license;
  }
  return new XMLSerializer().serializeToString(out);
}

export function parseModelList(text: string): ModelListEntry[] {
  const root = parseXml(text);
  const names = (value: string): string[] => (value ? value.split(" ") : []);
  return Array.from(root.children).map((m) => ({
    key: attr(m, "key"),
    version: intAttr(m, "version"),
    status: attr(m, "status"),
    title: attr(m, "title"),
    owners: names(m.getAttribute("owners") ?? ""),
    editors: names(m.getAttribute("editors") ?? ""),
  }));
}

export function parseSession(text: string): SessionInfo {
  const root = parseXml(text);
  return {
    user: attr(root, "user"),
    displayName: attr(root, "display-name"),
    role: attr(root, "role"),
  };
}

export function parseNotifications(text: string): NotificationEntry[] {
  const root = parseXml(text);
  return Array.from(root.children).map((n) => parseNotification(n));
}

export function parseNotificationText(text: string): NotificationEntry {
  return parseNotification(parseXml(text));
}

function parseNotification(n: Element): NotificationEntry {
  const reviewText = child(n, "review-text")?.textContent;
  return {
    id: intAttr(n, "id"),
    key: attr(n, "key"),
    version: intAttr(n, "version"),
    event: attr(n, "event"),
    at: attr(n, "at"),
    read: attr(n, "read") === "true",
    ...(reviewText == null ? {} : { reviewText }),
  };
}

export function parseFileEntry(text: string): FileEntry {
  const root = parseXml(text);
  return {
    blob: attr(root, "blob"),
    name: attr(root, "name"),
    type: attr(root, "type"),
    size: intAttr(root, "size"),
  };
}

export function parseError(text: string): { code: string; message: string } | null {
  try {
    const root = parseXml(text);
    if (root.tagName !== "error") {
      return null;
    }
    return { code: attr(root, "code"), message: childText(root, "message") };
  } catch {
    return null;
  }
}
