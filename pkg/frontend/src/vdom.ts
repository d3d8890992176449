/** Minimal virtual-node layer.
 *
 * Render functions build plain data trees so component tests can inspect
 * them in Node without a DOM implementation; `toDom` realizes a tree in the
 * browser.
 */

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  children: (VNode | string)[];
}

export function h(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: (VNode | string | null | undefined | false)[]
): VNode {
  return {
    tag,
    attrs,
    children: children.filter((c): c is VNode | string => c !== null && c !== undefined && c !== false),
  };
}

/** Depth-first concatenated text content (like Element.textContent). */
export function textOf(node: VNode | string): string {
  if (typeof node === "string") return node;
  return node.children.map(textOf).join("");
}

/** All nodes (including `root`) matching a predicate, in document order. */
export function findAll(root: VNode, pred: (n: VNode) => boolean): VNode[] {
  const out: VNode[] = [];
  const walk = (n: VNode | string) => {
    if (typeof n === "string") return;
    if (pred(n)) out.push(n);
    n.children.forEach(walk);
  };
  walk(root);
  return out;
}

export function findByClass(root: VNode, cls: string): VNode[] {
  return findAll(root, (n) => (n.attrs.class ?? "").split(/\s+/).includes(cls));
}

export function toDom(node: VNode | string): Node {
  if (typeof node === "string") return document.createTextNode(node);
  const el = document.createElement(node.tag);
  for (const [k, v] of Object.entries(node.attrs)) {
    el.setAttribute(k, v);
  }
  for (const child of node.children) {
    el.appendChild(toDom(child));
  }
  return el;
}
