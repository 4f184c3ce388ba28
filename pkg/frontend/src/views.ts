// Route views. Each view builds its DOM from fresh server responses; after
// any mutation we refetch rather than patching local copies. Buttons are
// shown or hidden from visible state only, never as an access decision:
// every privileged action is attempted server-side and errors are rendered.

import { ApiError, GalleryClient, Verdict } from "./api.js";
import { partitionQueue, validateReviewText } from "./queue.js";
import { renderModelPage } from "./render.js";
import {
  AuthorRef,
  FileEntry,
  ModelDoc,
  ModelListEntry,
  NotificationEntry,
  Reference,
  SessionInfo,
} from "./xml.js";

export interface ViewContext {
  client: GalleryClient;
  session: SessionInfo | null;
  navigate(hash: string): void;
  setSession(session: SessionInfo | null): void;
  toast(message: string, kind?: "ok" | "error"): void;
  refreshUnread(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function button(label: string, className: string, onClick: () => void): HTMLButtonElement {
  const b = el("button", className, label);
  b.type = "button";
  b.addEventListener("click", onClick);
  return b;
}

export function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return `${err.code}: ${err.message}`;
  }
  return err instanceof Error ? err.message : String(err);
}

function statusBadge(status: string): HTMLElement {
  return el("span", `badge badge-${status}`, status);
}

// ---------------------------------------------------------------------------
// login

export function loginView(ctx: ViewContext): HTMLElement {
  const root = el("section", "login-view");
  root.appendChild(el("h2", undefined, "Sign in"));
  const form = el("form", "login-form");
  const message = el("p", "form-error");
  message.hidden = true;

  const userInput = el("input");
  userInput.name = "user";
  userInput.autocomplete = "username";
  userInput.required = true;
  const passInput = el("input");
  passInput.name = "pass";
  passInput.type = "password";
  passInput.autocomplete = "current-password";
  passInput.required = true;

  const userLabel = el("label", undefined, "Username ");
  userLabel.appendChild(userInput);
  const passLabel = el("label", undefined, "Password ");
  passLabel.appendChild(passInput);
  const submit = el("button", "primary", "Sign in");
  submit.type = "submit";

  form.append(userLabel, passLabel, submit, message);
  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    message.hidden = true;
    try {
      const { session } = await ctx.client.login(userInput.value, passInput.value);
      ctx.setSession(session);
      ctx.toast(`Signed in as ${session.displayName}`);
      ctx.navigate("#/");
    } catch (err) {
      message.textContent = describeError(err);
      message.hidden = false;
    }
  });
  root.appendChild(form);
  return root;
}

// ---------------------------------------------------------------------------
// gallery

export async function galleryView(ctx: ViewContext): Promise<HTMLElement> {
  const root = el("section", "gallery-view");
  if (ctx.session === null) {
    root.appendChild(el("h2", undefined, "Discrete model gallery"));
    const blurb = el("p");
    blurb.append(
      "Browsing the full catalogue requires an account. ",
      "Published models stay reachable through their permanent links without one.",
    );
    root.appendChild(blurb);
    const link = el("a", "primary", "Sign in");
    link.href = "#/login";
    root.appendChild(link);
    return root;
  }

  const entries = await ctx.client.listModels();
  root.appendChild(el("h2", undefined, "Models"));

  const createForm = el("form", "create-form");
  const titleInput = el("input");
  titleInput.name = "title";
  titleInput.placeholder = "Title of the new model";
  titleInput.required = true;
  const createButton = el("button", "primary", "Create");
  createButton.type = "submit";
  createForm.append(titleInput, createButton);
  createForm.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    try {
      const doc = await ctx.client.createModel(titleInput.value);
      ctx.toast(`Created ${doc.key}`);
      ctx.navigate(`#/edit/${doc.key}`);
    } catch (err) {
      ctx.toast(describeError(err), "error");
    }
  });
  root.appendChild(createForm);

  const list = el("ul", "model-list");
  const me = ctx.session.user;
  for (const entry of entries) {
    const item = el("li", "model-entry");
    const link = el("a", undefined, entry.title || entry.key);
    link.href = `#/model/${entry.key}`;
    item.appendChild(link);
    item.appendChild(statusBadge(entry.status));
    item.appendChild(el("span", "version-tag", `v${entry.version}`));
    if (entry.owners.includes(me) || entry.editors.includes(me)) {
      item.appendChild(el("span", "badge badge-mine", "yours"));
    }
    list.appendChild(item);
  }
  if (entries.length === 0) {
    list.appendChild(el("li", "empty", "Nothing visible yet."));
  }
  root.appendChild(list);
  return root;
}

// ---------------------------------------------------------------------------
// model page

async function fetchForViewing(ctx: ViewContext, key: string): Promise<ModelDoc> {
  if (ctx.session === null) {
    return ctx.client.getPublicModel(key);
  }
  try {
    return await ctx.client.getModel(key);
  } catch (err) {
    // a signed-in visitor without read permit may still see the public copy
    if (err instanceof ApiError && (err.status === 403 || err.status === 404)) {
      return ctx.client.getPublicModel(key);
    }
    throw err;
  }
}

export async function modelView(
  ctx: ViewContext,
  key: string,
  version?: number,
): Promise<HTMLElement> {
  const root = el("section", "model-view");
  const doc =
    version === undefined
      ? await fetchForViewing(ctx, key)
      : await ctx.client.getVersion(key, version);

  if (version !== undefined) {
    const note = el("p", "pinned-note");
    note.append(`You are viewing version ${version} of this model. `);
    const back = el("a", undefined, "Latest");
    back.href = `#/model/${key}`;
    note.appendChild(back);
    root.appendChild(note);
  }

  root.appendChild(renderModelPage(doc));

  const permalink = el("p", "permalink");
  const pa = el("a", undefined, `Permanent link to version ${doc.version}`);
  pa.href = `#/model/${key}/v/${doc.version}`;
  permalink.appendChild(pa);
  root.appendChild(permalink);

  if (ctx.session !== null && version === undefined) {
    root.appendChild(actionBar(ctx, doc));
  }
  return root;
}

function actionBar(ctx: ViewContext, doc: ModelDoc): HTMLElement {
  const bar = el("div", "action-bar");
  if (doc.status === "edit") {
    bar.appendChild(
      button("Edit", "primary", () => ctx.navigate(`#/edit/${doc.key}`)),
    );
  }
  if (doc.status === "approved") {
    bar.appendChild(
      button("Reopen for editing", "", async () => {
        try {
          await ctx.client.reopen(doc.key);
          ctx.toast("Reopened; a fresh editable version was appended.");
          ctx.navigate(`#/edit/${doc.key}`);
        } catch (err) {
          ctx.toast(describeError(err), "error");
        }
      }),
    );
  }
  bar.appendChild(
    button("Delete", "danger", async () => {
      if (!window.confirm(`Delete ${doc.key} and its whole history?`)) {
        return;
      }
      try {
        await ctx.client.deleteModel(doc.key);
        ctx.toast(`Deleted ${doc.key}`);
        ctx.navigate("#/");
      } catch (err) {
        ctx.toast(describeError(err), "error");
      }
    }),
  );

  const grantForm = el("form", "grant-form");
  const userInput = el("input");
  userInput.name = "user";
  userInput.placeholder = "username";
  userInput.required = true;
  const roleSelect = el("select");
  roleSelect.name = "role";
  for (const role of ["editor", "owner"]) {
    const opt = el("option", undefined, role);
    opt.value = role;
    roleSelect.appendChild(opt);
  }
  const grantButton = el("button", "", "Grant");
  grantButton.type = "submit";
  grantForm.append(userInput, roleSelect, grantButton);
  grantForm.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    try {
      await ctx.client.grant(doc.key, userInput.value, roleSelect.value as "owner" | "editor");
      ctx.toast(`Granted ${roleSelect.value} to ${userInput.value}`);
      userInput.value = "";
    } catch (err) {
      ctx.toast(describeError(err), "error");
    }
  });
  bar.appendChild(grantForm);
  return bar;
}

// ---------------------------------------------------------------------------
// editor

interface EditableReference {
  key: string;
  type: string;
  attrsText: string;
}

interface EditableMedia {
  id: string;
  title: string;
  text: string;
  files: FileEntry[];
  preview?: string;
}

interface EditorState {
  base: ModelDoc;
  title: string;
  authorsText: string;
  text: string;
  keywordsText: string;
  references: EditableReference[];
  media: EditableMedia[];
}

function toEditorState(doc: ModelDoc): EditorState {
  return {
    base: doc,
    title: doc.title,
    authorsText: doc.authors
      .map((a) => (a.affiliation ? `${a.name} | ${a.affiliation}` : a.name))
      .join("\n"),
    text: doc.text,
    keywordsText: doc.keywords.join(", "),
    references: doc.references.map((r) => ({
      key: r.key,
      type: r.type,
      attrsText: Object.entries(r.attrs)
        .map(([k, v]) => `${k} = ${v}`)
        .join("\n"),
    })),
    media: doc.media.map((m) => ({
      id: m.id,
      title: m.title,
      text: m.text,
      files: [...m.files],
      ...(m.preview === undefined ? {} : { preview: m.preview }),
    })),
  };
}

function parseAuthorLines(text: string): AuthorRef[] {
  const out: AuthorRef[] = [];
  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (!line) {
      continue;
    }
    const sep = line.indexOf("|");
    if (sep < 0) {
      out.push({ name: line });
    } else {
      const name = line.slice(0, sep).trim();
      const affiliation = line.slice(sep + 1).trim();
      out.push(affiliation ? { name, affiliation } : { name });
    }
  }
  return out;
}

function parseAttrLines(text: string): Record<string, string> {
  const attrs: Record<string, string> = {};
  for (const raw of text.split("\n")) {
    const line = raw.trim();
    const sep = line.indexOf("=");
    if (!line || sep < 0) {
      continue;
    }
    attrs[line.slice(0, sep).trim()] = line.slice(sep + 1).trim();
  }
  return attrs;
}

/** Assemble the document a save would PUT; version stays the loaded base. */
function collectDoc(state: EditorState): ModelDoc {
  const references: Reference[] = state.references
    .filter((r) => r.key.trim() !== "")
    .map((r) => ({
      key: r.key.trim(),
      type: r.type.trim() || "misc",
      attrs: parseAttrLines(r.attrsText),
    }));
  return {
    key: state.base.key,
    version: state.base.version,
    status: state.base.status,
    editedBy: state.base.editedBy,
    schema: state.base.schema,
    title: state.title,
    authors: parseAuthorLines(state.authorsText),
    text: state.text,
    keywords: state.keywordsText
      .split(",")
      .map((k) => k.trim())
      .filter((k) => k !== ""),
    references,
    media: state.media.map((m) => ({
      id: m.id,
      title: m.title,
      text: m.text,
      files: [...m.files],
      ...(m.preview === undefined ? {} : { preview: m.preview }),
    })),
    ...(state.base.date ? { date: state.base.date } : {}),
    ...(state.base.license ? { license: state.base.license } : {}),
  };
}

const MEDIA_ID = /^[A-Za-z0-9_:-]+$/;

export async function editorView(ctx: ViewContext, key: string): Promise<HTMLElement> {
  const doc = await ctx.client.getModel(key);
  const state = toEditorState(doc);
  const readOnly = doc.status !== "edit";

  const root = el("section", "editor-view");
  const heading = el("h2");
  heading.append(`Editing ${key} `, statusBadge(doc.status), ` v${doc.version}`);
  root.appendChild(heading);

  if (readOnly) {
    root.appendChild(
      el(
        "p",
        "readonly-note",
        `This model is ${doc.status}; the form is read-only. ` +
          (doc.status === "approved"
            ? "Reopen it from the model page to edit again."
            : doc.status === "pending"
              ? "A reviewer has it now."
              : "Rejected models stay closed."),
      ),
    );
  }

  const banner = el("p", "form-error");
  banner.hidden = true;
  root.appendChild(banner);

  const layout = el("div", "editor-layout");
  const form = el("form", "editor-form");
  const preview = el("div", "editor-preview");
  layout.append(form, preview);
  root.appendChild(layout);

  const showBanner = (text: string) => {
    banner.textContent = text;
    banner.hidden = false;
  };

  const refreshPreview = () => {
    preview.replaceChildren(renderModelPage(collectDoc(state)));
  };

  const field = (labelText: string, input: HTMLElement): HTMLElement => {
    const wrap = el("div", "field");
    wrap.appendChild(el("label", undefined, labelText));
    wrap.appendChild(input);
    return wrap;
  };

  const titleInput = el("input");
  titleInput.value = state.title;
  titleInput.addEventListener("input", () => {
    state.title = titleInput.value;
  });
  form.appendChild(field("Title", titleInput));

  const authorsInput = el("textarea");
  authorsInput.rows = 3;
  authorsInput.value = state.authorsText;
  authorsInput.placeholder = "One author per line: Name | Affiliation";
  authorsInput.addEventListener("input", () => {
    state.authorsText = authorsInput.value;
  });
  form.appendChild(field("Authors", authorsInput));

  const textInput = el("textarea");
  textInput.rows = 10;
  textInput.value = state.text;
  textInput.placeholder = "Description; \\cite{key} and \\media{id} are substituted on display.";
  textInput.addEventListener("input", () => {
    state.text = textInput.value;
  });
  const textError = el("p", "form-error inline");
  textError.hidden = true;
  const textField = field("Text", textInput);
  textField.appendChild(textError);
  form.appendChild(textField);

  const keywordsInput = el("input");
  keywordsInput.value = state.keywordsText;
  keywordsInput.placeholder = "comma, separated, keywords";
  keywordsInput.addEventListener("input", () => {
    state.keywordsText = keywordsInput.value;
  });
  form.appendChild(field("Keywords", keywordsInput));

  // references ------------------------------------------------------------
  const refsBox = el("fieldset", "references-box");
  refsBox.appendChild(el("legend", undefined, "References"));
  const refsList = el("div");
  refsBox.appendChild(refsList);

  const renderRefs = () => {
    refsList.replaceChildren();
    state.references.forEach((ref, i) => {
      const row = el("div", "reference-row");
      const keyInput = el("input");
      keyInput.placeholder = "key";
      keyInput.value = ref.key;
      keyInput.addEventListener("input", () => {
        ref.key = keyInput.value;
      });
      const typeInput = el("input");
      typeInput.placeholder = "type (article, book, ...)";
      typeInput.value = ref.type;
      typeInput.addEventListener("input", () => {
        ref.type = typeInput.value;
      });
      const attrsInput = el("textarea");
      attrsInput.rows = 4;
      attrsInput.placeholder = "one per line: author = A. Author";
      attrsInput.value = ref.attrsText;
      attrsInput.addEventListener("input", () => {
        ref.attrsText = attrsInput.value;
      });
      row.append(keyInput, typeInput, attrsInput);
      if (!readOnly) {
        row.appendChild(
          button("Remove", "danger small", () => {
            state.references.splice(i, 1);
            renderRefs();
            refreshPreview();
          }),
        );
      }
      refsList.appendChild(row);
    });
  };
  renderRefs();
  if (!readOnly) {
    refsBox.appendChild(
      button("Add reference", "small", () => {
        state.references.push({ key: "", type: "article", attrsText: "" });
        renderRefs();
      }),
    );
  }
  form.appendChild(refsBox);

  // media objects ----------------------------------------------------------
  const mediaBox = el("fieldset", "media-box");
  mediaBox.appendChild(el("legend", undefined, "Media objects"));
  const mediaList = el("div");
  mediaBox.appendChild(mediaList);

  const renderMediaEditors = () => {
    mediaList.replaceChildren();
    state.media.forEach((m, i) => {
      const box = el("div", "media-row");
      box.appendChild(el("p", "media-id", m.id));
      const titleIn = el("input");
      titleIn.placeholder = "title";
      titleIn.value = m.title;
      titleIn.addEventListener("input", () => {
        m.title = titleIn.value;
      });
      const textIn = el("textarea");
      textIn.rows = 2;
      textIn.placeholder = "caption";
      textIn.value = m.text;
      textIn.addEventListener("input", () => {
        m.text = textIn.value;
      });
      box.append(titleIn, textIn);

      const fileList = el("ul", "files");
      for (const f of m.files) {
        const li = el("li");
        li.append(`${f.name} (${f.type}, ${f.size} bytes)`);
        if (!readOnly) {
          li.appendChild(
            button("Remove", "danger small", () => {
              m.files = m.files.filter((x) => x !== f);
              if (m.preview === f.blob && !m.files.some((x) => x.blob === f.blob)) {
                delete m.preview;
              }
              renderMediaEditors();
              refreshPreview();
            }),
          );
        }
        fileList.appendChild(li);
      }
      box.appendChild(fileList);

      const previewSelect = el("select", "preview-select");
      const none = el("option", undefined, "no preview image");
      none.value = "";
      previewSelect.appendChild(none);
      for (const f of m.files) {
        const opt = el("option", undefined, `preview: ${f.name}`);
        opt.value = f.blob;
        previewSelect.appendChild(opt);
      }
      previewSelect.value = m.preview ?? "";
      previewSelect.addEventListener("change", () => {
        if (previewSelect.value === "") {
          delete m.preview;
        } else {
          m.preview = previewSelect.value;
        }
        refreshPreview();
      });
      box.appendChild(previewSelect);

      if (!readOnly) {
        const fileInput = el("input");
        fileInput.type = "file";
        box.appendChild(fileInput);
        box.appendChild(
          button("Upload file", "small", async () => {
            const chosen = fileInput.files?.[0];
            if (!chosen) {
              ctx.toast("Choose a file first.", "error");
              return;
            }
            try {
              const entry = await ctx.client.uploadFile(
                state.base.key,
                await chosen.arrayBuffer(),
                chosen.name,
                chosen.type || "application/octet-stream",
              );
              m.files = [...m.files, entry];
              renderMediaEditors();
              refreshPreview();
              ctx.toast(`Uploaded ${entry.name}; save to attach it.`);
            } catch (err) {
              ctx.toast(describeError(err), "error");
            }
          }),
        );
        box.appendChild(
          button("Remove object", "danger small", () => {
            state.media.splice(i, 1);
            renderMediaEditors();
            refreshPreview();
          }),
        );
      }
      mediaList.appendChild(box);
    });
  };
  renderMediaEditors();

  if (!readOnly) {
    const addRow = el("div", "media-add");
    const idInput = el("input");
    idInput.placeholder = "new media object id";
    addRow.appendChild(idInput);
    addRow.appendChild(
      button("Add media object", "small", () => {
        const id = idInput.value.trim();
        if (!MEDIA_ID.test(id)) {
          ctx.toast("Media ids use letters, digits, _ : - only.", "error");
          return;
        }
        if (state.media.some((m) => m.id === id)) {
          ctx.toast(`Media object ${id} already exists.`, "error");
          return;
        }
        state.media.push({ id, title: id, text: "", files: [] });
        idInput.value = "";
        renderMediaEditors();
        refreshPreview();
      }),
    );
    mediaBox.appendChild(addRow);
  }
  form.appendChild(mediaBox);

  // actions ----------------------------------------------------------------
  const actions = el("div", "editor-actions");
  if (!readOnly) {
    const save = el("button", "primary", "Save");
    save.type = "submit";
    actions.appendChild(save);

    // visible only while the version is editable
    actions.appendChild(
      button("Submit for review", "", async () => {
        try {
          await ctx.client.submit(key);
          ctx.toast("Submitted; a reviewer will pick it up.");
          ctx.navigate(`#/edit/${key}`);
        } catch (err) {
          showBanner(describeError(err));
        }
      }),
    );
  }
  actions.appendChild(button("Back to model", "", () => ctx.navigate(`#/model/${key}`)));
  form.appendChild(actions);

  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    banner.hidden = true;
    textError.hidden = true;
    try {
      const saved = await ctx.client.putModel(collectDoc(state));
      ctx.toast(`Saved version ${saved.version}`);
      ctx.navigate(`#/edit/${key}`);
    } catch (err) {
      // keep the form as typed; show where the problem is
      if (err instanceof ApiError && /DANGLING_(CITE|MEDIA)/.test(err.message)) {
        textError.textContent = err.message;
        textError.hidden = false;
      } else if (err instanceof ApiError && err.code === "VERSION_CONFLICT") {
        showBanner(
          `${err.message} Someone saved a newer version; open the model page ` +
            "to see it, or adjust and retry after reloading.",
        );
      } else {
        showBanner(describeError(err));
      }
    }
  });

  if (readOnly) {
    for (const node of form.querySelectorAll("input, textarea, select, button")) {
      if ((node as HTMLElement).textContent !== "Back to model") {
        (node as HTMLInputElement).disabled = true;
      }
    }
  }

  form.addEventListener("input", refreshPreview);
  refreshPreview();
  return root;
}

// ---------------------------------------------------------------------------
// review queue

export async function queueView(ctx: ViewContext): Promise<HTMLElement> {
  const root = el("section", "queue-view");
  root.appendChild(el("h2", undefined, "Review queue"));
  if (ctx.session === null) {
    root.appendChild(el("p", undefined, "Sign in as a reviewer to see the queue."));
    return root;
  }
  const entries = await ctx.client.listModels();
  const { actionable, own } = partitionQueue(entries, ctx.session.user);

  const pendingList = el("ul", "queue-list");
  for (const entry of actionable) {
    pendingList.appendChild(queueRow(ctx, entry, root));
  }
  if (actionable.length === 0) {
    pendingList.appendChild(el("li", "empty", "Nothing waiting for review."));
  }
  root.appendChild(pendingList);

  if (own.length > 0) {
    root.appendChild(el("h3", undefined, "Your submissions"));
    const ownList = el("ul", "queue-list own");
    for (const entry of own) {
      const item = el("li", "queue-entry own-entry");
      const link = el("a", undefined, entry.title || entry.key);
      link.href = `#/model/${entry.key}`;
      item.append(link, el("span", "version-tag", `v${entry.version}`));
      item.appendChild(el("span", "badge badge-own", "own model"));
      ownList.appendChild(item);
    }
    root.appendChild(ownList);
  }
  return root;
}

function queueRow(ctx: ViewContext, entry: ModelListEntry, root: HTMLElement): HTMLElement {
  const item = el("li", "queue-entry");
  const link = el("a", undefined, entry.title || entry.key);
  link.href = `#/model/${entry.key}`;
  item.append(link, el("span", "version-tag", `v${entry.version}`));

  const dialogSlot = el("div", "verdict-slot");
  item.appendChild(
    button("Review", "primary small", () => {
      dialogSlot.replaceChildren(verdictDialog(ctx, entry.key, root));
    }),
  );
  item.appendChild(dialogSlot);
  return item;
}

function verdictDialog(ctx: ViewContext, key: string, root: HTMLElement): HTMLElement {
  const form = el("form", "verdict-form");
  const choices = el("div", "verdict-choices");
  const verdicts: [Verdict, string][] = [
    ["approve", "Approve"],
    ["send_back", "Send back"],
    ["reject", "Reject"],
  ];
  verdicts.forEach(([value, label], i) => {
    const wrap = el("label");
    const radio = el("input");
    radio.type = "radio";
    radio.name = "verdict";
    radio.value = value;
    radio.checked = i === 0;
    wrap.append(radio, ` ${label}`);
    choices.appendChild(wrap);
  });
  form.appendChild(choices);

  const textInput = el("textarea");
  textInput.rows = 4;
  textInput.name = "review-text";
  textInput.placeholder = "Review text for the authors (required)";
  form.appendChild(textInput);

  const error = el("p", "form-error inline");
  error.hidden = true;
  form.appendChild(error);

  const submit = el("button", "primary", "Record verdict");
  submit.type = "submit";
  form.appendChild(submit);
  form.appendChild(button("Cancel", "small", () => form.remove()));

  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const problem = validateReviewText(textInput.value);
    if (problem !== null) {
      error.textContent = problem;
      error.hidden = false;
      return;
    }
    error.hidden = true;
    const verdict = (form.querySelector("input[name=verdict]:checked") as HTMLInputElement)
      .value as Verdict;
    try {
      await ctx.client.review(key, verdict, textInput.value);
      ctx.toast(`Verdict recorded for ${key}.`);
      root.replaceWith(await queueView(ctx));
    } catch (err) {
      error.textContent = describeError(err);
      error.hidden = false;
    }
  });
  return form;
}

// ---------------------------------------------------------------------------
// inbox

const EVENT_LABELS: Record<string, string> = {
  submitted: "Submitted for review",
  approved: "Approved",
  sent_back: "Sent back",
  rejected: "Rejected",
};

export async function inboxView(ctx: ViewContext): Promise<HTMLElement> {
  const root = el("section", "inbox-view");
  root.appendChild(el("h2", undefined, "Inbox"));
  if (ctx.session === null) {
    root.appendChild(el("p", undefined, "Sign in to see notifications."));
    return root;
  }
  const entries = await ctx.client.notifications();
  const list = el("ul", "inbox-list");
  for (const entry of [...entries].reverse()) {
    list.appendChild(inboxRow(ctx, entry, root));
  }
  if (entries.length === 0) {
    list.appendChild(el("li", "empty", "No notifications."));
  }
  root.appendChild(list);
  return root;
}

function inboxRow(ctx: ViewContext, entry: NotificationEntry, root: HTMLElement): HTMLElement {
  const item = el("li", entry.read ? "inbox-entry" : "inbox-entry unread");
  const head = el("p");
  head.append(el("strong", undefined, EVENT_LABELS[entry.event] ?? entry.event), " ");
  const link = el("a", undefined, entry.key);
  link.href = `#/model/${entry.key}`;
  head.append(link, ` v${entry.version}`, el("span", "timestamp", ` ${entry.at}`));
  item.appendChild(head);
  if (entry.reviewText) {
    item.appendChild(el("blockquote", "review-text", entry.reviewText));
  }
  if (!entry.read) {
    item.appendChild(
      button("Mark read", "small", async () => {
        try {
          await ctx.client.markRead(entry.id);
          ctx.refreshUnread();
          root.replaceWith(await inboxView(ctx));
        } catch (err) {
          ctx.toast(describeError(err), "error");
        }
      }),
    );
  }
  return item;
}
