import { ApiError } from "./api.js";
import { clear, h } from "./dom.js";
import { ProjectStore } from "./store.js";
import { SegmentJson, ThreadJson } from "./types.js";

export type SortKey = "byCreated" | "byUpdated" | "byEntity";

function renderSegment(segment: SegmentJson, onNavigate: (iri: string) => void): Node {
  switch (segment.kind) {
    case "mention":
      return h("span", { class: "mention", text: segment.source });
    case "entityLink":
      return h("a", {
        href: "#",
        class: "entity-link",
        text: segment.source,
        onclick: (event) => {
          event.preventDefault();
          if (segment.value) onNavigate(segment.value);
        },
      });
    case "externalLink":
      return h("a", {
        href: segment.value ?? "#",
        target: "_blank",
        rel: "noopener",
        text: segment.source,
      });
    default:
      return document.createTextNode(segment.source);
  }
}

function threadCard(
  thread: ThreadJson,
  onNavigate: (iri: string) => void,
  onStatus: (thread: ThreadJson, status: "open" | "resolved") => void,
  entityName: (iri: string) => string,
): HTMLElement {
  const card = h("article", { class: `thread ${thread.status}` });
  card.append(
    h(
      "header",
      {},
      h("a", {
        href: "#",
        class: "entity-link",
        text: entityName(thread.entity),
        onclick: (event) => {
          event.preventDefault();
          onNavigate(thread.entity);
        },
      }),
      h("span", { class: `status-pill ${thread.status}`, text: thread.status }),
      h("button", {
        class: "mini",
        text: thread.status === "open" ? "resolve" : "reopen",
        onclick: () => onStatus(thread, thread.status === "open" ? "resolved" : "open"),
      }),
    ),
  );
  for (const comment of thread.comments) {
    const body = h("p", { class: "comment-body" });
    for (const segment of comment.segments) body.append(renderSegment(segment, onNavigate));
    card.append(
      h(
        "div",
        { class: "comment" },
        h("span", { class: "author", text: comment.author }),
        h("time", { text: new Date(comment.ts).toLocaleString() }),
        body,
      ),
    );
  }
  return card;
}

/**
 * Discussion panes: the per-entity pane with a composer (mention
 * autocomplete fed by the project member list), and the all-threads tab
 * whose sort toggles reorder the already-loaded list without refetching.
 */
export class CommentsPane {
  readonly element = h("div", { class: "comments-pane" });
  private threads: ThreadJson[] = [];
  private entity: string | null = null;
  private members: string[] = [];

  constructor(
    private readonly store: ProjectStore,
    private readonly onNavigate: (iri: string) => void,
  ) {}

  setMembers(members: string[]): void {
    this.members = members;
  }

  async showFor(entity: string): Promise<void> {
    this.entity = entity;
    await this.reload();
  }

  async reload(): Promise<void> {
    const all = await this.store.api.comments(this.store.project, "byUpdated");
    this.threads = all.threads.filter((t) => t.entity === this.entity);
    this.render();
  }

  private render(): void {
    clear(this.element);
    if (!this.entity) return;
    this.element.append(h("h3", { text: "Discussions" }));
    for (const thread of this.threads) {
      this.element.append(
        threadCard(
          thread,
          this.onNavigate,
          (t, status) =>
            void this.store.api
              .setThreadStatus(this.store.project, t.id, status)
              .then(() => this.reload()),
          (iri) => this.store.view(iri)?.displayName.text ?? iri.split(/[/#]/).pop() ?? iri,
        ),
      );
      const replyBox = this.composer(thread.id);
      this.element.append(replyBox);
    }
    this.element.append(h("h4", { text: "New thread" }), this.composer(null));
  }

  private composer(threadId: string | null): HTMLElement {
    const listId = `members-${Math.random().toString(36).slice(2)}`;
    const datalist = h("datalist", { id: listId });
    for (const member of this.members) {
      datalist.append(h("option", { value: `@${member}` }));
    }
    const input = h("textarea", {
      class: "composer-input",
      placeholder: "Comment; @mention teammates, link entities with [[:name]]",
      list: listId,
    }) as HTMLTextAreaElement;
    const status = h("span", { class: "status" });
    const send = h("button", {
      class: "mini",
      text: threadId ? "reply" : "start thread",
      onclick: () => {
        const body = input.value;
        if (body.trim() === "") {
          status.textContent = "empty comments are not allowed";
          return;
        }
        void this.store.api
          .postComment(this.store.project, body, this.entity ?? undefined,
                       threadId ?? undefined)
          .then(() => {
            input.value = "";
            status.textContent = "";
            return this.reload();
          })
          .catch((err: unknown) => {
            status.textContent = err instanceof ApiError ? err.message : String(err);
          });
      },
    });
    return h("div", { class: "composer" }, input, datalist, send, status);
  }
}

/** Stable local reordering of already-loaded threads (no refetch). */
export function sortThreads(
  threads: ThreadJson[],
  sort: SortKey,
  name: (iri: string) => string,
): ThreadJson[] {
  const out = [...threads];
  if (sort === "byCreated") {
    out.sort((a, b) => b.created.localeCompare(a.created) || a.id.localeCompare(b.id));
  } else if (sort === "byUpdated") {
    out.sort((a, b) => b.updated.localeCompare(a.updated) || a.id.localeCompare(b.id));
  } else {
    out.sort(
      (a, b) =>
        name(a.entity).toLowerCase().localeCompare(name(b.entity).toLowerCase()) ||
        a.created.localeCompare(b.created) ||
        a.id.localeCompare(b.id),
    );
  }
  return out;
}

export class CommentsTab {
  readonly element = h("div", { class: "comments-tab" });
  private threads: ThreadJson[] = [];
  private sort: SortKey = "byCreated";

  constructor(
    private readonly store: ProjectStore,
    private readonly onNavigate: (iri: string) => void,
  ) {}

  async load(): Promise<void> {
    const out = await this.store.api.comments(this.store.project, "byCreated");
    this.threads = out.threads;
    this.render();
  }

  /** Toggling the sort key reorders locally; no refetch. */
  setSort(sort: SortKey): void {
    this.sort = sort;
    this.render();
  }

  sorted(): ThreadJson[] {
    return sortThreads(this.threads, this.sort, (iri) =>
      this.store.view(iri)?.displayName.text ?? iri.split(/[/#]/).pop() ?? iri,
    );
  }

  private render(): void {
    clear(this.element);
    const bar = h("div", { class: "sort-bar" });
    for (const key of ["byCreated", "byUpdated", "byEntity"] as SortKey[]) {
      bar.append(
        h("button", {
          class: `mini ${this.sort === key ? "active" : ""}`,
          text: key.replace("by", "by "),
          onclick: () => this.setSort(key),
        }),
      );
    }
    this.element.append(h("h3", { text: "All discussions" }), bar);
    for (const thread of this.sorted()) {
      this.element.append(
        threadCard(
          thread,
          this.onNavigate,
          (t, status) =>
            void this.store.api
              .setThreadStatus(this.store.project, t.id, status)
              .then(() => this.load()),
          (iri) => this.store.view(iri)?.displayName.text ?? iri.split(/[/#]/).pop() ?? iri,
        ),
      );
    }
  }
}
