import { clear, h } from "./dom.js";
import { ProjectStore } from "./store.js";
import { ChildSummary, EntityView, TagJson } from "./types.js";

export interface TreeCallbacks {
  onSelect(iri: string): void;
}

/**
 * Class hierarchy panel. Rows show the primary display name, the
 * secondary display name to its right when configured, colored tag chips
 * and a child count; deprecated entities render struck through. Children
 * are lazy-loaded on expansion, and every repaint reads straight from the
 * store (which only ever contains server responses).
 */
export class TreeView {
  readonly element = h("div", { class: "tree" });
  readonly checked = new Set<string>();

  constructor(
    private readonly store: ProjectStore,
    private readonly callbacks: TreeCallbacks,
    private tagIndex: Map<string, TagJson> = new Map(),
  ) {
    store.onChange(() => this.render());
  }

  setTags(tags: TagJson[]): void {
    this.tagIndex = new Map(tags.map((t) => [t.id, t]));
    this.render();
  }

  render(): void {
    clear(this.element);
    const root = this.store.view(this.store.rootIri);
    if (!root) {
      this.element.append(h("p", { class: "muted", text: "loading tree..." }));
      return;
    }
    this.element.append(this.rowsFor(root, 0));
  }

  private rowsFor(view: EntityView, depth: number): HTMLElement {
    const list = h("ul", { class: "tree-level" });
    for (const child of view.children) {
      list.append(this.row(child, depth));
    }
    if (view.children.length === 0 && depth === 0) {
      list.append(h("li", { class: "muted", text: "empty project" }));
    }
    return list;
  }

  private row(child: ChildSummary, depth: number): HTMLElement {
    const expanded = this.store.expanded.has(child.iri);
    const expandable = child.childCount > 0;
    const toggle = h("span", {
      class: `twisty ${expandable ? "expandable" : "leaf"}`,
      text: expandable ? (expanded ? "▾" : "▸") : "·",
      onclick: (event) => {
        event.stopPropagation();
        if (!expandable) return;
        if (expanded) this.store.collapse(child.iri);
        else void this.store.expand(child.iri);
      },
    });

    const checkbox = h("input", {
      type: "checkbox",
      class: "pick",
      onclick: (event) => {
        event.stopPropagation();
        const box = event.target as HTMLInputElement;
        if (box.checked) this.checked.add(child.iri);
        else this.checked.delete(child.iri);
      },
    }) as HTMLInputElement;
    checkbox.checked = this.checked.has(child.iri);

    const name = h("span", {
      class: `name ${child.deprecated ? "deprecated" : ""}`,
      text: child.displayName.text,
    });
    const label = h("span", { class: "labels" }, name);
    if (child.displayName.secondary) {
      label.append(
        h("span", { class: "secondary", text: child.displayName.secondary.text }),
      );
    }

    const chips = h("span", { class: "chips" });
    for (const tagId of child.tags) {
      const tag = this.tagIndex.get(tagId);
      const chip = h("span", { class: "chip", text: tag?.label ?? tagId });
      chip.style.backgroundColor = tag?.color ?? "#999999";
      chips.append(chip);
    }

    const row = h(
      "div",
      {
        class: `tree-row ${this.store.selected === child.iri ? "selected" : ""}`,
        onclick: () => this.callbacks.onSelect(child.iri),
      },
      toggle,
      checkbox,
      label,
      chips,
      child.childCount > 0
        ? h("span", { class: "count", text: String(child.childCount) })
        : null,
    );

    const item = h("li", {}, row);
    if (expanded) {
      const childView = this.store.view(child.iri);
      if (childView) item.append(this.rowsFor(childView, depth + 1));
    }
    return item;
  }
}
