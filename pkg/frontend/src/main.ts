import { setupApp } from './app.js';

setupApp();
