import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from app.api.routes import circulator, coupling, gyrator, junction, nonlinear, quantum
import uvicorn

logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

app = FastAPI(
    title="FENNEC Toolkit API",
    description="Design and simulation of FENNEC gyrators and circulators",
    version="1.0.0"
)

# CORS configuration for frontend
app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:3000", "http://localhost:3001"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(junction.router, prefix="/api/junction", tags=["Junction"])
app.include_router(coupling.router, prefix="/api/coupling", tags=["Coupling"])
app.include_router(gyrator.router, prefix="/api/gyrator", tags=["Gyrator"])
app.include_router(circulator.router, prefix="/api/circulator", tags=["Circulator"])
app.include_router(quantum.router, prefix="/api/quantum", tags=["Quantum"])
app.include_router(nonlinear.router, prefix="/api/nonlinear", tags=["Nonlinear"])

@app.get("/")
async def root():
    return {
        "message": "FENNEC Toolkit API - gyrator and circulator design",
        "status": "operational",
        "docs": "/docs"
    }

@app.get("/health")
async def health():
    return {"status": "healthy"}

if __name__ == "__main__":
    uvicorn.run("app.main:app", host="127.0.0.1", port=8080, reload=True)
