/** Etype color assignments shared by rectangles and the legend. */

const PALETTE: Record<string, string> = {
  organic: "#3f51b5",
  dd_top: "#e65100",
  native_ad: "#f9a825",
  dd_right: "#bf360c",
  top_places: "#00897b",
  knowledge_panel: "#6a1b9a",
  paa: "#2e7d32",
  image_pack: "#0288d1",
  top_stories: "#c2185b",
  other_widget: "#5d4037",
  unknown_widget: "#757575",
  chrome: "#455a64",
  related_searches: "#9e9d24",
};

export function etypeColor(etype: string): string {
  return PALETTE[etype] ?? "#616161";
}
