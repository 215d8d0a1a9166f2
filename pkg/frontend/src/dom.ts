// Tiny DOM builders. Children are appended as nodes or text (never parsed
// as HTML), so service-supplied strings cannot inject markup.

type Handler = (event: Event) => void;
type Attrs = Record<string, string | Handler>;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Attrs = {},
  children: Array<Node | string> = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key.replace(/^on/, ""), value as EventListener);
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}

export function textInput(name: string, placeholder: string, value = ""): HTMLInputElement {
  const input = el("input", { name, placeholder, type: "text" });
  input.value = value;
  return input;
}
