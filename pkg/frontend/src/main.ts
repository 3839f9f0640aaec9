import { App } from "./app";
import "./style.css";

const app = new App();
document.body.appendChild(app.element);
