import { ReviewApi } from "./api.js";
import { ReviewApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const app = new ReviewApp(root, new ReviewApi());
  void app.start();
  root.tabIndex = -1;
  root.focus();
}
