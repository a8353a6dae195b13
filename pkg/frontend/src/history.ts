import { ApiError } from "./api.js";
import { describeChange } from "./changes.js";
import { clear, h } from "./dom.js";
import { ProjectStore } from "./store.js";
import { RevisionJson } from "./types.js";

/**
 * Change history: composite revisions rendered as grouped atomic changes
 * with their commit messages, optionally filtered to one entity, with a
 * revert action per revision.
 */
export class HistoryPanel {
  readonly element = h("div", { class: "history" });
  private entity: string | null = null;
  private status = h("p", { class: "status" });

  constructor(private readonly store: ProjectStore) {}

  async show(entity: string | null): Promise<void> {
    this.entity = entity;
    await this.reload();
  }

  async reload(): Promise<void> {
    const out = await this.store.api.history(
      this.store.project,
      this.entity ?? undefined,
      100,
    );
    this.render(out.revisions);
  }

  private render(revisions: RevisionJson[]): void {
    clear(this.element);
    const scope = this.entity
      ? this.store.view(this.entity)?.displayName.text ?? this.entity
      : "whole project";
    this.element.append(h("h3", { text: `History (${scope})` }), this.status);
    if (revisions.length === 0) {
      this.element.append(h("p", { class: "muted", text: "no revisions yet" }));
      return;
    }
    for (const revision of revisions) {
      const provenance =
        revision.prov.kind + (revision.prov.of ? ` of r${revision.prov.of}` : "");
      const head = h(
        "header",
        {},
        h("strong", { text: `r${revision.rev}` }),
        h("span", { class: "author", text: revision.author }),
        h("span", { class: "prov", text: provenance }),
        h("time", { text: new Date(revision.ts).toLocaleString() }),
        h("button", {
          class: "mini",
          text: "revert",
          onclick: () => {
            void this.store.api
              .revert(this.store.project, revision.rev)
              .then(() => {
                this.status.textContent = `reverted r${revision.rev}`;
                return this.reload();
              })
              .catch((err: unknown) => {
                this.status.textContent =
                  err instanceof ApiError ? `cannot revert: ${err.message}` : String(err);
              });
          },
        }),
      );
      const changes = h("ul", { class: "changes" });
      for (const change of revision.changes.slice(0, 12)) {
        changes.append(h("li", { text: describeChange(change) }));
      }
      if (revision.changes.length > 12) {
        changes.append(
          h("li", {
            class: "muted",
            text: `... ${revision.changes.length - 12} more changes`,
          }),
        );
      }
      this.element.append(
        h(
          "article",
          { class: "revision" },
          head,
          h("p", { class: "message", text: revision.msg }),
          changes,
        ),
      );
    }
  }
}
