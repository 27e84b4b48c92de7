import { ReviewApi } from "./api.js";
import { mountApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const raterId = params.get("rater_id") ?? window.prompt("rater id?") ?? "anonymous";
const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");
mountApp(root, new ReviewApi(""), raterId);
