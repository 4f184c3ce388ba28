// The one rendering function for model documents. The public model page and
// the editor's live preview both call renderModelPage, so they can never
// drift apart.

import { fileUrl } from "./api.js";
import { parseRichText } from "./richtext.js";
import { MediaObjectDoc, ModelDoc, Reference } from "./xml.js";

export function renderReference(ref: Reference): string {
  const get = (name: string): string | undefined => ref.attrs[name];
  if (Object.keys(ref.attrs).length === 0) {
    return `[${ref.key}].`;
  }
  const sentences: string[] = [];
  const author = get("author");
  if (author) {
    sentences.push(author);
  }
  const title = get("title");
  if (title) {
    sentences.push(title);
  }

  let tail = get("journal") || get("booktitle") || "";
  const volume = get("volume");
  if (volume) {
    tail += (tail ? ", " : "") + volume;
    const number = get("number");
    if (number) {
      tail += `(${number})`;
    }
  }
  const pages = get("pages");
  if (pages) {
    tail += (tail ? ":" : "") + pages;
  }
  for (const name of ["publisher", "year"]) {
    const value = get(name);
    if (value) {
      tail += (tail ? ", " : "") + value;
    }
  }
  if (tail) {
    sentences.push(tail);
  }

  if (sentences.length === 0) {
    return `[${ref.key}].`;
  }
  return sentences.map((s) => (s.endsWith(".") ? s : s + ".")).join(" ");
}

function dangling(): HTMLElement {
  const marker = document.createElement("span");
  marker.className = "dangling";
  marker.textContent = "[?]";
  return marker;
}

function renderText(doc: ModelDoc, target: HTMLElement): void {
  const refNumbers = new Map<string, number>();
  doc.references.forEach((r, i) => refNumbers.set(r.key, i + 1));
  const mediaById = new Map<string, MediaObjectDoc>();
  for (const m of doc.media) {
    mediaById.set(m.id, m);
  }

  for (const token of parseRichText(doc.text)) {
    if (token.kind === "text") {
      target.appendChild(document.createTextNode(token.value));
    } else if (token.kind === "cite") {
      const n = refNumbers.get(token.key);
      if (n === undefined) {
        target.appendChild(dangling());
        continue;
      }
      const sup = document.createElement("sup");
      sup.className = "cite";
      const a = document.createElement("a");
      a.href = `#ref-${token.key}`;
      a.textContent = `[${n}]`;
      sup.appendChild(a);
      target.appendChild(sup);
    } else {
      const media = mediaById.get(token.key);
      if (media === undefined) {
        target.appendChild(dangling());
      } else if (media.preview !== undefined) {
        const img = document.createElement("img");
        img.className = "media-inline";
        img.src = fileUrl(media.preview);
        img.alt = media.title;
        target.appendChild(img);
      } else {
        const a = document.createElement("a");
        a.className = "chip";
        a.href = `#media-${media.id}`;
        a.textContent = media.title || media.id;
        target.appendChild(a);
      }
    }
  }
}

function renderMedia(media: MediaObjectDoc): HTMLElement {
  const figure = document.createElement("figure");
  figure.className = "media-object";
  figure.id = `media-${media.id}`;
  if (media.preview !== undefined) {
    const img = document.createElement("img");
    img.src = fileUrl(media.preview);
    img.alt = media.title;
    figure.appendChild(img);
  }
  const caption = document.createElement("figcaption");
  const heading = document.createElement("strong");
  heading.textContent = media.title;
  caption.appendChild(heading);
  if (media.text) {
    const text = document.createElement("p");
    text.textContent = media.text;
    caption.appendChild(text);
  }
  const files = document.createElement("ul");
  files.className = "files";
  for (const f of media.files) {
    const item = document.createElement("li");
    const a = document.createElement("a");
    a.className = "chip";
    a.href = fileUrl(f.blob);
    a.setAttribute("download", f.name);
    a.textContent = f.name;
    const meta = document.createElement("span");
    meta.className = "file-meta";
    meta.textContent = ` ${f.type}, ${formatSize(f.size)}`;
    item.appendChild(a);
    item.appendChild(meta);
    files.appendChild(item);
  }
  caption.appendChild(files);
  figure.appendChild(caption);
  return figure;
}

export function formatSize(bytes: number): string {
  if (bytes < 1024) {
    return `${bytes} B`;
  }
  const units = ["KiB", "MiB", "GiB"];
  let value = bytes;
  let unit = "B";
  for (const next of units) {
    if (value < 1024) {
      break;
    }
    value /= 1024;
    unit = next;
  }
  return `${value.toFixed(value >= 10 ? 0 : 1)} ${unit}`;
}

export function renderModelPage(doc: ModelDoc): HTMLElement {
  const article = document.createElement("article");
  article.className = "model-page";

  const header = document.createElement("header");
  const title = document.createElement("h2");
  title.textContent = doc.title;
  header.appendChild(title);
  const badge = document.createElement("span");
  badge.className = `badge badge-${doc.status}`;
  badge.textContent = doc.status;
  header.appendChild(badge);
  const versionTag = document.createElement("span");
  versionTag.className = "version-tag";
  versionTag.textContent = `v${doc.version}`;
  header.appendChild(versionTag);
  article.appendChild(header);

  const authors = document.createElement("p");
  authors.className = "authors";
  authors.textContent = doc.authors
    .map((a) => (a.affiliation ? `${a.name} (${a.affiliation})` : a.name))
    .join(", ");
  article.appendChild(authors);

  const body = document.createElement("div");
  body.className = "description";
  renderText(doc, body);
  article.appendChild(body);

  const mediaSection = document.createElement("section");
  mediaSection.className = "media";
  for (const m of doc.media) {
    mediaSection.appendChild(renderMedia(m));
  }
  article.appendChild(mediaSection);

  if (doc.references.length > 0) {
    const section = document.createElement("section");
    section.className = "references";
    const heading = document.createElement("h3");
    heading.textContent = "References";
    section.appendChild(heading);
    const list = document.createElement("ol");
    for (const r of doc.references) {
      const item = document.createElement("li");
      item.id = `ref-${r.key}`;
      item.textContent = renderReference(r);
      list.appendChild(item);
    }
    section.appendChild(list);
    article.appendChild(section);
  }

  if (doc.keywords.length > 0) {
    const keywords = document.createElement("p");
    keywords.className = "keywords";
    keywords.textContent = `Keywords: ${doc.keywords.join(", ")}`;
    article.appendChild(keywords);
  }

  if (doc.license) {
    const license = document.createElement("p");
    license.className = "license";
    license.textContent = `License: ${doc.license}`;
    article.appendChild(license);
  }

  return article;
}
