/** Spec-driven parameter controls.
 *
 * One control per ParamSpec: floats render as sliders, ints as numeric
 * steppers. The current value starts at the spec default and is always
 * clamped into [min, max]; model code never sees an out-of-range value.
 */

import type { ParamSpec } from "./types";

export interface RenderedControl {
  spec: ParamSpec;
  element: HTMLElement;
  input: HTMLInputElement;
  getValue(): number;
  setValue(value: number): void;
}

function clamp(spec: ParamSpec, value: number): number {
  if (Number.isNaN(value)) return spec.default;
  const bounded = Math.min(spec.max, Math.max(spec.min, value));
  return spec.type === "int" ? Math.round(bounded) : bounded;
}

export function renderControl(
  spec: ParamSpec,
  onChange?: (value: number) => void,
): RenderedControl {
  const element = document.createElement("label");
  element.className = `control control-${spec.type}`;
  element.dataset.param = spec.name;
  element.title = spec.desc;

  const caption = document.createElement("span");
  caption.className = "control-name";
  caption.textContent = spec.display_name;
  element.appendChild(caption);

  const input = document.createElement("input");
  input.name = spec.name;
  input.min = String(spec.min);
  input.max = String(spec.max);
  if (spec.type === "float") {
    input.type = "range";
    input.step = "any";
  } else {
    input.type = "number";
    input.step = "1";
  }
  input.value = String(spec.default);
  element.appendChild(input);

  const readout = document.createElement("output");
  readout.className = "control-value";
  readout.textContent = String(spec.default);
  element.appendChild(readout);

  const getValue = () => clamp(spec, Number(input.value));
  const setValue = (value: number) => {
    const next = clamp(spec, value);
    input.value = String(next);
    readout.textContent = String(next);
  };
  input.addEventListener("input", () => {
    setValue(Number(input.value));
    onChange?.(getValue());
  });

  return { spec, element, input, getValue, setValue };
}

export function renderControls(
  specs: ParamSpec[],
  container: HTMLElement,
  onChange?: (name: string, value: number) => void,
): RenderedControl[] {
  container.textContent = "";
  return specs.map((spec) => {
    const control = renderControl(spec, (value) => onChange?.(spec.name, value));
    container.appendChild(control.element);
    return control;
  });
}

export function controlValues(controls: RenderedControl[]): Record<string, number> {
  const values: Record<string, number> = {};
  for (const control of controls) values[control.spec.name] = control.getValue();
  return values;
}
