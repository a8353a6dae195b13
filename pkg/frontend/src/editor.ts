import { ApiError } from "./api.js";
import { buildEntityChanges, newEntityChanges } from "./changes.js";
import { clear, h } from "./dom.js";
import { ProjectStore } from "./store.js";
import { AnnotationValueJson, EntityView, SettingsJson } from "./types.js";

interface ValueRow {
  lang: HTMLInputElement;
  text: HTMLInputElement;
}

/**
 * Entity editor: per-language label fields, synonym and definition lists,
 * business flags, and the parent breadcrumb. Save diffs the form against
 * the loaded view and commits the whole edit as one composite revision.
 */
export class EntityEditor {
  readonly element = h("div", { class: "editor" });
  private view: EntityView | null = null;
  private labelRows: ValueRow[] = [];
  private altRows: ValueRow[] = [];
  private defRows: ValueRow[] = [];
  private noAds!: HTMLInputElement;
  private reviewed!: HTMLInputElement;
  private status = h("p", { class: "status" });

  constructor(
    private readonly store: ProjectStore,
    private readonly settings: () => SettingsJson | null,
    private readonly onNavigate: (iri: string) => void,
  ) {}

  show(view: EntityView): void {
    this.view = view;
    this.render();
  }

  private valueRow(value: AnnotationValueJson, rows: ValueRow[]): HTMLElement {
    const lang = h("input", { class: "lang", value: value.lang ?? "" }) as HTMLInputElement;
    lang.value = value.lang ?? "";
    const text = h("input", { class: "value" }) as HTMLInputElement;
    text.value = value.lexical;
    const row: ValueRow = { lang, text };
    rows.push(row);
    const wrapper = h(
      "div",
      { class: "value-row" },
      lang,
      text,
      h("button", {
        class: "mini",
        text: "×",
        onclick: () => {
          rows.splice(rows.indexOf(row), 1);
          wrapper.remove();
        },
      }),
    );
    return wrapper;
  }

  private valueList(
    title: string,
    values: AnnotationValueJson[],
    rows: ValueRow[],
    defaultLang: string,
  ): HTMLElement {
    rows.length = 0;
    const body = h("div", {});
    for (const value of values) body.append(this.valueRow(value, rows));
    const add = h("button", {
      class: "mini",
      text: `+ ${title.toLowerCase()}`,
      onclick: () =>
        body.append(this.valueRow({ lexical: "", lang: defaultLang }, rows)),
    });
    return h("section", {}, h("h3", { text: title }), body, add);
  }

  private collect(rows: ValueRow[]): AnnotationValueJson[] {
    return rows
      .filter((row) => row.text.value.trim() !== "")
      .map((row) => ({
        lexical: row.text.value,
        lang: row.lang.value.trim() || undefined,
      }));
  }

  private render(): void {
    clear(this.element);
    const view = this.view;
    if (!view) return;
    const defaultLang = this.settings()?.default ?? "en";

    const crumb = h("nav", { class: "breadcrumb" });
    for (const ancestor of view.breadcrumb) {
      const ancestorView = this.store.view(ancestor);
      crumb.append(
        h("a", {
          href: "#",
          text: ancestorView?.displayName.text ?? ancestor.split(/[/#]/).pop() ?? ancestor,
          onclick: (event) => {
            event.preventDefault();
            this.onNavigate(ancestor);
          },
        }),
        h("span", { class: "sep", text: " › " }),
      );
    }
    crumb.append(h("strong", { text: view.displayName.text }));

    const header = h(
      "div",
      { class: "editor-head" },
      crumb,
      view.deprecated ? h("span", { class: "flag deprecated", text: "deprecated" }) : null,
      h("code", { class: "iri", text: view.iri }),
    );

    this.noAds = h("input", { type: "checkbox" }) as HTMLInputElement;
    this.noAds.checked = view.noAds;
    this.reviewed = h("input", { type: "checkbox" }) as HTMLInputElement;
    this.reviewed.checked = view.isHumanReviewed;

    const pickLang = (values: AnnotationValueJson[]) =>
      values.length > 0 ? values : [];

    const save = h("button", {
      class: "primary",
      text: "Save (one revision)",
      onclick: () => void this.save(),
    });

    this.element.append(
      header,
      this.valueList("Labels", pickLang(view.labels), this.labelRows, defaultLang),
      this.valueList("Synonyms", pickLang(view.altLabels), this.altRows, defaultLang),
      this.valueList("Definition", pickLang(view.definitions), this.defRows, defaultLang),
      h(
        "section",
        { class: "flags" },
        h("label", {}, this.noAds, " noAds"),
        h("label", {}, this.reviewed, " human reviewed"),
      ),
      save,
      this.status,
    );
  }

  private async save(): Promise<void> {
    const view = this.view;
    if (!view) return;
    const changes = buildEntityChanges(view, {
      labels: this.collect(this.labelRows),
      altLabels: this.collect(this.altRows),
      definitions: this.collect(this.defRows),
      noAds: this.noAds.checked,
      isHumanReviewed: this.reviewed.checked,
    });
    if (changes.length === 0) {
      this.status.textContent = "nothing to save";
      return;
    }
    try {
      const out = await this.store.api.commit(
        this.store.project,
        changes,
        `edit ${view.displayName.text}`,
      );
      this.status.textContent = `saved as revision ${out.revision?.rev}`;
    } catch (err) {
      this.status.textContent =
        err instanceof ApiError ? `rejected: ${err.message}` : String(err);
    }
  }

  /** Create a child entity under the given parent: one three-change commit. */
  async createChild(parentIri: string, label: string): Promise<string | null> {
    const settings = this.settings();
    const namespace = settings?.namespace ?? "https://interests.example.org/";
    const taken = new Set(this.store.views.keys());
    for (const view of this.store.views.values()) {
      for (const child of view.children) taken.add(child.iri);
    }
    const { iri, changes } = newEntityChanges(
      namespace,
      parentIri,
      label,
      settings?.default ?? "en",
      taken,
    );
    try {
      await this.store.api.commit(this.store.project, changes, `add ${label}`);
      return iri;
    } catch (err) {
      this.status.textContent =
        err instanceof ApiError ? `rejected: ${err.message}` : String(err);
      return null;
    }
  }
}
