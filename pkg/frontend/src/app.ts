import { ApiClient, ApiError } from "./api.js";
import { CommentsPane, CommentsTab } from "./comments.js";
import { openMergeDialog, openMoveDialog } from "./dialogs.js";
import { clear, h } from "./dom.js";
import { EntityEditor } from "./editor.js";
import { SseFeed } from "./events.js";
import { HistoryPanel } from "./history.js";
import { entityPath, parsePath } from "./router.js";
import { ProjectStore } from "./store.js";
import { TreeView } from "./tree.js";
import { SettingsJson } from "./types.js";

type Tab = "entity" | "history" | "comments";

class App {
  private readonly api = new ApiClient("");
  private root = document.getElementById("app") as HTMLElement;
  private store: ProjectStore | null = null;
  private settings: SettingsJson | null = null;
  private tree: TreeView | null = null;
  private editor: EntityEditor | null = null;
  private commentsPane: CommentsPane | null = null;
  private commentsTab: CommentsTab | null = null;
  private historyPanel: HistoryPanel | null = null;
  private tab: Tab = "entity";
  private centerHost = h("div", { class: "center" });
  private footer = h("footer", { class: "footer" });

  async start(): Promise<void> {
    const token = sessionStorage.getItem("token");
    if (token) {
      this.api.token = token;
      await this.afterLogin();
    } else {
      this.renderLogin();
    }
  }

  private renderLogin(message = ""): void {
    clear(this.root);
    const username = h("input", { placeholder: "username" }) as HTMLInputElement;
    const password = h("input", {
      placeholder: "password",
      type: "password",
    }) as HTMLInputElement;
    const error = h("p", { class: "error", text: message });
    const submit = async (register: boolean) => {
      try {
        if (register) await this.api.register(username.value, password.value);
        await this.api.login(username.value, password.value);
        sessionStorage.setItem("token", this.api.token ?? "");
        await this.afterLogin();
      } catch (err) {
        error.textContent = err instanceof ApiError ? err.message : String(err);
      }
    };
    this.root.append(
      h(
        "div",
        { class: "login" },
        h("h1", { text: "taxonomist" }),
        username,
        password,
        h(
          "div",
          {},
          h("button", { class: "primary", text: "Log in", onclick: () => void submit(false) }),
          h("button", { class: "mini", text: "Register", onclick: () => void submit(true) }),
        ),
        error,
      ),
    );
  }

  private async afterLogin(): Promise<void> {
    const route = parsePath(location.pathname);
    if (route) {
      await this.openProject(route.project, route.entityIri);
      return;
    }
    await this.renderProjectList();
  }

  private async renderProjectList(): Promise<void> {
    clear(this.root);
    let projects;
    try {
      projects = (await this.api.projects()).projects;
    } catch (err) {
      if (err instanceof ApiError && err.status === 401) {
        sessionStorage.removeItem("token");
        this.renderLogin("session expired, log in again");
        return;
      }
      throw err;
    }
    const list = h("ul", { class: "project-list" });
    for (const project of projects) {
      list.append(
        h("li", {
          text: `${project.name || project.id} (${project.role}, r${project.revision})`,
          onclick: () => void this.openProject(project.id, null),
        }),
      );
    }
    const newId = h("input", { placeholder: "new project id" }) as HTMLInputElement;
    this.root.append(
      h(
        "div",
        { class: "projects" },
        h("h1", { text: "Projects" }),
        list,
        h(
          "div",
          {},
          newId,
          h("button", {
            class: "mini",
            text: "Create",
            onclick: () =>
              void this.api
                .createProject(newId.value, newId.value)
                .then(() => this.renderProjectList()),
          }),
        ),
      ),
    );
  }

  private names(iri: string): string {
    return (
      this.store?.view(iri)?.displayName.text ?? iri.split(/[/#]/).pop() ?? iri
    );
  }

  private async openProject(projectId: string, entityIri: string | null): Promise<void> {
    this.settings = await this.api.settings(projectId);
    const feed = new SseFeed("", projectId, this.api.token ?? "");
    this.store = new ProjectStore(this.api, projectId, this.settings.rootIri, feed);
    this.editor = new EntityEditor(this.store, () => this.settings, (iri) =>
      void this.select(iri),
    );
    this.commentsPane = new CommentsPane(this.store, (iri) => void this.select(iri));
    this.commentsTab = new CommentsTab(this.store, (iri) => void this.select(iri));
    this.historyPanel = new HistoryPanel(this.store);
    this.tree = new TreeView(this.store, { onSelect: (iri) => void this.select(iri) });

    this.store.onChange(() => this.renderFooter());
    await this.store.open();
    void this.api.tags(projectId).then((out) => this.tree?.setTags(out.tags));
    void this.api
      .members(projectId)
      .then((out) => this.commentsPane?.setMembers(out.members));

    this.renderWorkspace(projectId);
    if (entityIri) await this.select(entityIri, false);
  }

  private renderWorkspace(projectId: string): void {
    clear(this.root);
    const search = h("input", { class: "search", placeholder: "search..." }) as HTMLInputElement;
    const searchResults = h("ul", { class: "search-results" });
    search.addEventListener("input", () => {
      const text = search.value.trim();
      if (text.length < 2) {
        clear(searchResults);
        return;
      }
      void this.api.search(projectId, text).then((out) => {
        clear(searchResults);
        for (const hit of out.results.slice(0, 10)) {
          searchResults.append(
            h("li", {
              text: `${hit.displayName.text} (${hit.matchedField}, ${hit.rank})`,
              onclick: () => {
                clear(searchResults);
                search.value = "";
                void this.select(hit.iri);
              },
            }),
          );
        }
      });
    });

    const toolbar = h(
      "div",
      { class: "toolbar" },
      h("button", {
        class: "mini",
        text: "New child",
        onclick: () => void this.newChild(),
      }),
      h("button", {
        class: "mini",
        text: "Merge checked...",
        onclick: () => this.mergeChecked(),
      }),
      h("button", {
        class: "mini",
        text: "Move checked...",
        onclick: () => this.moveChecked(),
      }),
    );

    const tabs = h("div", { class: "tabs" });
    for (const tab of ["entity", "history", "comments"] as Tab[]) {
      tabs.append(
        h("button", {
          class: `tab ${this.tab === tab ? "active" : ""}`,
          text: tab,
          onclick: () => void this.showTab(tab),
        }),
      );
    }

    this.root.append(
      h(
        "div",
        { class: "workspace" },
        h(
          "header",
          { class: "topbar" },
          h("h1", { text: this.settings?.name || projectId }),
          search,
          searchResults,
        ),
        h(
          "div",
          { class: "columns" },
          h("aside", { class: "left" }, toolbar, this.tree!.element),
          h("main", {}, tabs, this.centerHost),
          h("aside", { class: "right" }, this.commentsPane!.element),
        ),
        this.footer,
      ),
    );
    void this.showTab("entity");
    this.renderFooter();
  }

  private renderFooter(): void {
    const store = this.store;
    if (!store) return;
    this.footer.textContent =
      `revision ${store.revision} · event ${store.seq} · ` +
      `${store.selected ? this.names(store.selected) : "nothing selected"}`;
  }

  private async showTab(tab: Tab): Promise<void> {
    this.tab = tab;
    clear(this.centerHost);
    if (tab === "entity") {
      const selected = this.store?.selected;
      if (selected) {
        const view = this.store?.view(selected);
        if (view) this.editor?.show(view);
      }
      this.centerHost.append(
        this.editor?.element ?? h("p", { text: "select an entity" }),
      );
    } else if (tab === "history") {
      this.centerHost.append(this.historyPanel!.element);
      await this.historyPanel!.show(this.store?.selected ?? null);
    } else {
      this.centerHost.append(this.commentsTab!.element);
      await this.commentsTab!.load();
    }
    this.renderWorkspaceTabs();
  }

  private renderWorkspaceTabs(): void {
    for (const button of this.root.querySelectorAll(".tabs .tab")) {
      button.classList.toggle("active", button.textContent === this.tab);
    }
  }

  private async select(iri: string, push = true): Promise<void> {
    const store = this.store;
    if (!store) return;
    await store.select(iri);
    if (push) {
      history.pushState({}, "", entityPath(store.project, iri));
    }
    const view = store.view(iri);
    if (view && this.editor) this.editor.show(view);
    if (this.tab === "history") await this.historyPanel!.show(iri);
    await this.commentsPane?.showFor(iri);
    this.renderFooter();
  }

  private async newChild(): Promise<void> {
    const store = this.store;
    if (!store || !this.editor) return;
    const parent = store.selected ?? store.rootIri;
    const label = prompt(`Label for the new child of ${this.names(parent)}:`);
    if (!label) return;
    const iri = await this.editor.createChild(parent, label);
    if (iri) await this.select(iri);
  }

  private mergeChecked(): void {
    const sources = [...(this.tree?.checked ?? [])];
    if (sources.length === 0 || !this.store) return;
    openMergeDialog(this.api, this.store.project, sources, (iri) => this.names(iri), () => {
      this.tree?.checked.clear();
    });
  }

  private moveChecked(): void {
    const entities = [...(this.tree?.checked ?? [])];
    if (entities.length === 0 || !this.store) return;
    openMoveDialog(this.api, this.store.project, entities, (iri) => this.names(iri), () => {
      this.tree?.checked.clear();
    });
  }
}

window.addEventListener("popstate", () => {
  location.reload(); // back/forward simply re-enters via the deep link
});

void new App().start();
