import { ApiClient, ApiError } from "./api.js";
import { clear, h } from "./dom.js";
import { SearchResult } from "./types.js";

interface PickerCallbacks {
  onPicked(result: SearchResult): void;
}

/** Search-backed entity picker used by the merge and move dialogs. */
function entityPicker(
  api: ApiClient,
  project: string,
  callbacks: PickerCallbacks,
): HTMLElement {
  const results = h("ul", { class: "picker-results" });
  const input = h("input", {
    class: "picker-input",
    placeholder: "search entities...",
    oninput: () => {
      const text = (input as HTMLInputElement).value.trim();
      if (text.length < 2) {
        clear(results);
        return;
      }
      void api.search(project, text).then((out) => {
        clear(results);
        for (const hit of out.results.slice(0, 8)) {
          results.append(
            h("li", {
              text: `${hit.displayName.text} (${hit.rank})`,
              onclick: () => {
                callbacks.onPicked(hit);
                (input as HTMLInputElement).value = hit.displayName.text;
                clear(results);
              },
            }),
          );
        }
      });
    },
  });
  return h("div", { class: "picker" }, input, results);
}

interface DialogResult {
  committed: boolean;
}

function modal(title: string, body: HTMLElement[], onClose: () => void): HTMLElement {
  const overlay = h("div", { class: "overlay" });
  overlay.append(
    h(
      "div",
      { class: "dialog" },
      h(
        "header",
        {},
        h("h3", { text: title }),
        h("button", { class: "mini", text: "×", onclick: onClose }),
      ),
      ...body,
    ),
  );
  return overlay;
}

/**
 * Merge dialog: the checked tree entities are the sources; the curator
 * picks a target and writes the commit message. Cancel never touches the
 * network; plan errors from the server surface inline.
 */
export function openMergeDialog(
  api: ApiClient,
  project: string,
  sources: string[],
  names: (iri: string) => string,
  done: (result: DialogResult) => void,
): HTMLElement {
  let target: SearchResult | null = null;
  const error = h("p", { class: "error" });
  const message = h("input", {
    class: "message",
    placeholder: "commit message",
  }) as HTMLInputElement;
  message.value = `Merge ${sources.map(names).join(", ")}`;

  const close = (committed: boolean) => {
    overlay.remove();
    done({ committed });
  };

  const overlay = modal(
    "Merge entities",
    [
      h("p", { text: `Sources: ${sources.map(names).join(", ")}` }),
      h("p", { text: "Target:" }),
      entityPicker(api, project, { onPicked: (hit) => (target = hit) }),
      message,
      error,
      h(
        "div",
        { class: "dialog-actions" },
        h("button", { class: "mini", text: "Cancel", onclick: () => close(false) }),
        h("button", {
          class: "primary",
          text: "Merge",
          onclick: () => {
            if (!target) {
              error.textContent = "pick a target first";
              return;
            }
            void api
              .merge(project, sources, target.iri, message.value)
              .then(() => close(true))
              .catch((err: unknown) => {
                error.textContent = err instanceof ApiError ? err.message : String(err);
              });
          },
        }),
      ),
    ],
    () => close(false),
  );
  document.body.append(overlay);
  return overlay;
}

export function openMoveDialog(
  api: ApiClient,
  project: string,
  entities: string[],
  names: (iri: string) => string,
  done: (result: DialogResult) => void,
): HTMLElement {
  let parent: SearchResult | null = null;
  const error = h("p", { class: "error" });
  const message = h("input", {
    class: "message",
    placeholder: "commit message",
  }) as HTMLInputElement;
  message.value = `Move ${entities.map(names).join(", ")}`;

  const close = (committed: boolean) => {
    overlay.remove();
    done({ committed });
  };

  const overlay = modal(
    "Bulk move",
    [
      h("p", { text: `Moving: ${entities.map(names).join(", ")}` }),
      h("p", { text: "New parent:" }),
      entityPicker(api, project, { onPicked: (hit) => (parent = hit) }),
      message,
      error,
      h(
        "div",
        { class: "dialog-actions" },
        h("button", { class: "mini", text: "Cancel", onclick: () => close(false) }),
        h("button", {
          class: "primary",
          text: "Move",
          onclick: () => {
            if (!parent) {
              error.textContent = "pick the new parent first";
              return;
            }
            void api
              .move(project, entities, parent.iri, message.value)
              .then(() => close(true))
              .catch((err: unknown) => {
                error.textContent = err instanceof ApiError ? err.message : String(err);
              });
          },
        }),
      ),
    ],
    () => close(false),
  );
  document.body.append(overlay);
  return overlay;
}
